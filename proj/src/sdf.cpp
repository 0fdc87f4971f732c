#include "graspkit/sdf.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "graspkit/errors.hpp"
#include "graspkit/rng.hpp"

namespace grasp::geom {

namespace {

class SphereShape final : public Shape {
 public:
  explicit SphereShape(double r) : r_(r) {}

  double value(const Eigen::Vector3d& p) const override { return p.norm() - r_; }

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const double n = p.norm();
    if (n < 1e-14) return Eigen::Vector3d::UnitZ();
    return p / n;
  }

  Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double) const override {
    const double n = p.norm();
    if (n < 1e-14) return Eigen::Matrix3d::Zero();
    const Eigen::Vector3d u = p / n;
    return (Eigen::Matrix3d::Identity() - u * u.transpose()) / n;
  }

  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const override {
    return r_ * gradient(p);
  }

  double bounding_radius() const override { return r_; }

  Obb local_obb() const override {
    Obb o;
    o.half_extents = Eigen::Vector3d::Constant(r_);
    return o;
  }

 private:
  double r_;
};

class BoxShape final : public Shape {
 public:
  explicit BoxShape(const Eigen::Vector3d& h) : h_(h) {}

  double value(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d q = p.cwiseAbs() - h_;
    const Eigen::Vector3d k = q.cwiseMax(0.0);
    return k.norm() + std::min(q.maxCoeff(), 0.0);
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d q = p.cwiseAbs() - h_;
    Eigen::Vector3d sigma;
    for (int i = 0; i < 3; ++i) sigma[i] = p[i] >= 0.0 ? 1.0 : -1.0;
    if (q.maxCoeff() > 0.0) {
      const Eigen::Vector3d k = q.cwiseMax(0.0);
      return sigma.cwiseProduct(k) / k.norm();
    }
    int axis;
    q.maxCoeff(&axis);
    return sigma[axis] * Eigen::Vector3d::Unit(axis);
  }

  Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double) const override {
    const Eigen::Vector3d q = p.cwiseAbs() - h_;
    if (q.maxCoeff() <= 0.0) return Eigen::Matrix3d::Zero();
    const Eigen::Vector3d k = q.cwiseMax(0.0);
    const double s = k.norm();
    const Eigen::Vector3d u = k / s;
    Eigen::Vector3d sigma, act;
    for (int i = 0; i < 3; ++i) {
      sigma[i] = p[i] >= 0.0 ? 1.0 : -1.0;
      act[i] = q[i] > 0.0 ? 1.0 : 0.0;
    }
    Eigen::Matrix3d h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        h(i, j) = sigma[i] * sigma[j] * act[i] * act[j] *
                  (((i == j) ? 1.0 : 0.0) - u[i] * u[j]) / s;
    return h;
  }

  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d q = p.cwiseAbs() - h_;
    if (q.maxCoeff() > 0.0) return p.cwiseMax(-h_).cwiseMin(h_);
    int axis;
    q.maxCoeff(&axis);
    Eigen::Vector3d cp = p;
    cp[axis] = p[axis] >= 0.0 ? h_[axis] : -h_[axis];
    return cp;
  }

  double bounding_radius() const override { return h_.norm(); }

  Obb local_obb() const override {
    Obb o;
    o.half_extents = h_;
    return o;
  }

 private:
  Eigen::Vector3d h_;
};

class CylinderShape final : public Shape {
 public:
  CylinderShape(double radius, double half_length) : r_(radius), hl_(half_length) {}

  double value(const Eigen::Vector3d& p) const override {
    const Eigen::Vector2d d(std::hypot(p.x(), p.y()) - r_, std::abs(p.z()) - hl_);
    const Eigen::Vector2d k = d.cwiseMax(0.0);
    return k.norm() + std::min(d.maxCoeff(), 0.0);
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const auto [rhat, sz, d] = decompose(p);
    if (d.maxCoeff() > 0.0) {
      const Eigen::Vector2d k = d.cwiseMax(0.0);
      const Eigen::Vector2d u = k / k.norm();
      return u[0] * rhat + u[1] * sz * Eigen::Vector3d::UnitZ();
    }
    if (d[0] > d[1]) return rhat;
    return sz * Eigen::Vector3d::UnitZ();
  }

  Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double) const override {
    const auto [rhat, sz, d] = decompose(p);
    const double rr = std::max(std::hypot(p.x(), p.y()), 1e-14);
    const Eigen::Matrix3d dr_hat =
        (Eigen::Matrix3d() << 1 - rhat.x() * rhat.x(), -rhat.x() * rhat.y(), 0,
         -rhat.x() * rhat.y(), 1 - rhat.y() * rhat.y(), 0, 0, 0, 0)
            .finished() /
        rr;
    if (d.maxCoeff() <= 0.0) {
      if (d[0] > d[1]) return dr_hat;  // lateral wall: gradient is rhat
      return Eigen::Matrix3d::Zero();  // cap
    }
    const Eigen::Vector2d k = d.cwiseMax(0.0);
    const double s = k.norm();
    const Eigen::Vector2d u = k / s;
    Eigen::Vector2d act(d[0] > 0.0 ? 1.0 : 0.0, d[1] > 0.0 ? 1.0 : 0.0);
    Eigen::Matrix2d m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        m(i, j) = act[i] * act[j] * (((i == j) ? 1.0 : 0.0) - u[i] * u[j]) / s;
    const Eigen::Vector3d zdir = sz * Eigen::Vector3d::UnitZ();
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    h += rhat * (m(0, 0) * rhat + m(0, 1) * zdir).transpose();
    h += zdir * (m(1, 0) * rhat + m(1, 1) * zdir).transpose();
    h += u[0] * dr_hat;
    return h;
  }

  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const override {
    const auto [rhat, sz, d] = decompose(p);
    if (d.maxCoeff() > 0.0) {
      const double rad = std::min(std::hypot(p.x(), p.y()), r_);
      Eigen::Vector3d cp = rad * rhat;
      cp.z() = std::clamp(p.z(), -hl_, hl_);
      return cp;
    }
    if (d[0] > d[1]) {
      Eigen::Vector3d cp = r_ * rhat;
      cp.z() = p.z();
      return cp;
    }
    return {p.x(), p.y(), sz * hl_};
  }

  double bounding_radius() const override { return std::hypot(r_, hl_); }

  Obb local_obb() const override {
    Obb o;
    o.half_extents = Eigen::Vector3d(r_, r_, hl_);
    return o;
  }

 private:
  std::tuple<Eigen::Vector3d, double, Eigen::Vector2d> decompose(
      const Eigen::Vector3d& p) const {
    const double rr = std::hypot(p.x(), p.y());
    const Eigen::Vector3d rhat =
        rr < 1e-14 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d(p.x() / rr, p.y() / rr, 0.0);
    const double sz = p.z() >= 0.0 ? 1.0 : -1.0;
    return {rhat, sz, Eigen::Vector2d(rr - r_, std::abs(p.z()) - hl_)};
  }

  double r_, hl_;
};

class SuperellipsoidShape final : public Shape {
 public:
  SuperellipsoidShape(const Eigen::Vector3d& h, double e1, double e2)
      : h_(h), e1_(e1), e2_(e2) {
    if (e1 <= 0.0 || e1 > 2.0 || e2 <= 0.0 || e2 > 2.0)
      throw ConfigError("superellipsoid exponents must lie in (0, 2]");
    // Bounding radius from a parametric surface sweep.
    double best = h.maxCoeff();
    for (int i = 0; i <= 64; ++i)
      for (int j = 0; j <= 64; ++j) {
        const double th = M_PI * (i / 64.0 - 0.5), ph = 2.0 * M_PI * (j / 64.0);
        const auto spow = [](double v, double e) {
          return (v >= 0 ? 1.0 : -1.0) * std::pow(std::abs(v), e);
        };
        const Eigen::Vector3d s(h_.x() * spow(std::cos(th), e1_) * spow(std::cos(ph), e2_),
                                h_.y() * spow(std::cos(th), e1_) * spow(std::sin(ph), e2_),
                                h_.z() * spow(std::sin(th), e1_));
        best = std::max(best, s.norm());
      }
    bounding_radius_ = best;
  }

  double value(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d cp = closest_point(p);
    const double d = (p - cp).norm();
    return inside_outside(p) < 1.0 ? -d : d;
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d cp = closest_point(p);
    const double d = (p - cp).norm();
    if (d < 1e-12) {
      Eigen::Vector3d g = io_gradient(cp);
      const double n = g.norm();
      return n < 1e-14 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(g / n);
    }
    const double sign = inside_outside(p) < 1.0 ? -1.0 : 1.0;
    return sign * (p - cp) / d;
  }

  Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double) const override {
    const double h = 1e-5 * h_.maxCoeff();
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d e = h * Eigen::Vector3d::Unit(i);
      m.col(i) = (gradient(p + e) - gradient(p - e)) / (2.0 * h);
    }
    return 0.5 * (m + m.transpose());
  }

  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const override {
    // Radial initial guess: F is monotone along rays from the origin.
    Eigen::Vector3d dir = p;
    if (dir.norm() < 1e-12) dir = Eigen::Vector3d::UnitX();
    dir.normalize();
    double tlo = 0.0, thi = 2.0 * bounding_radius_;
    for (int i = 0; i < 80; ++i) {
      const double tm = 0.5 * (tlo + thi);
      (inside_outside(tm * dir) < 1.0 ? tlo : thi) = tm;
    }
    Eigen::Vector3d x = 0.5 * (tlo + thi) * dir;

    // Damped Newton on the projection conditions
    //   x - p + t grad F(x) = 0,  F(x) = 1.
    double t = (p - x).norm() / std::max(io_gradient(x).norm(), 1e-12);
    if (inside_outside(p) < 1.0) t = -t;
    Eigen::Vector4d res = residual(x, t, p);
    for (int iter = 0; iter < 80 && res.norm() > 1e-12; ++iter) {
      Eigen::Matrix4d jac;
      const Eigen::Vector3d g = io_gradient(x);
      jac.topLeftCorner<3, 3>() = Eigen::Matrix3d::Identity() + t * io_hessian(x);
      jac.topRightCorner<3, 1>() = g;
      jac.bottomLeftCorner<1, 3>() = g.transpose();
      jac(3, 3) = 0.0;
      const Eigen::Vector4d step = jac.fullPivLu().solve(-res);
      double alpha = 1.0;
      for (int ls = 0; ls < 30; ++ls) {
        const Eigen::Vector3d xn = x + alpha * step.head<3>();
        const double tn = t + alpha * step[3];
        const Eigen::Vector4d rn = residual(xn, tn, p);
        if (rn.norm() < res.norm() * (1.0 - 1e-4 * alpha)) {
          x = xn;
          t = tn;
          res = rn;
          break;
        }
        alpha *= 0.5;
        if (ls == 29) return x;  // stalled; radial point is still on-surface
      }
    }
    return x;
  }

  double bounding_radius() const override { return bounding_radius_; }

  Obb local_obb() const override {
    Obb o;
    o.half_extents = h_;
    return o;
  }

  double inside_outside(const Eigen::Vector3d& p) const {
    const double rx = std::abs(p.x()) / h_.x();
    const double ry = std::abs(p.y()) / h_.y();
    const double rz = std::abs(p.z()) / h_.z();
    const double w = std::pow(rx, 2.0 / e2_) + std::pow(ry, 2.0 / e2_);
    return std::pow(w, e2_ / e1_) + std::pow(rz, 2.0 / e1_);
  }

 private:
  Eigen::Vector4d residual(const Eigen::Vector3d& x, double t,
                           const Eigen::Vector3d& p) const {
    Eigen::Vector4d r;
    r.head<3>() = x - p + t * io_gradient(x);
    r[3] = inside_outside(x) - 1.0;
    return r;
  }

  Eigen::Vector3d io_gradient(const Eigen::Vector3d& p) const {
    const double rx = std::abs(p.x()) / h_.x();
    const double ry = std::abs(p.y()) / h_.y();
    const double rz = std::abs(p.z()) / h_.z();
    const double a = 2.0 / e2_, b = e2_ / e1_, c = 2.0 / e1_;
    const double w = std::pow(rx, a) + std::pow(ry, a);
    const double dw = w > 0.0 ? b * std::pow(w, b - 1.0) : 0.0;
    Eigen::Vector3d g;
    g.x() = dw * a * safe_pow(rx, a - 1.0) * sgn(p.x()) / h_.x();
    g.y() = dw * a * safe_pow(ry, a - 1.0) * sgn(p.y()) / h_.y();
    g.z() = c * safe_pow(rz, c - 1.0) * sgn(p.z()) / h_.z();
    return g;
  }

  Eigen::Matrix3d io_hessian(const Eigen::Vector3d& p) const {
    const double h = 1e-6 * h_.maxCoeff();
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d e = h * Eigen::Vector3d::Unit(i);
      m.col(i) = (io_gradient(p + e) - io_gradient(p - e)) / (2.0 * h);
    }
    return 0.5 * (m + m.transpose());
  }

  static double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }
  static double safe_pow(double base, double exp) {
    if (base <= 0.0) return exp > 0.0 ? 0.0 : 1e12;
    const double v = std::pow(base, exp);
    return std::isfinite(v) ? std::min(v, 1e12) : 1e12;
  }

  Eigen::Vector3d h_;
  double e1_, e2_;
  double bounding_radius_ = 0.0;
};

class MeshShape final : public Shape {
 public:
  MeshShape(TriangleMesh mesh, std::uint64_t seed)
      : mesh_(std::move(mesh)), seed_(seed) {
    for (const auto& v : mesh_.vertices())
      bounding_radius_ = std::max(bounding_radius_, v.norm());
  }

  double value(const Eigen::Vector3d& p) const override {
    const auto cp = mesh_.closest_point(p);
    return mesh_.is_inside(p) ? -cp.distance : cp.distance;
  }

  Eigen::Vector3d gradient(const Eigen::Vector3d& p) const override {
    const auto cp = mesh_.closest_point(p);
    if (cp.distance < 1e-12) return mesh_.surface_normal(cp.point, cp.triangle);
    const double sign = mesh_.is_inside(p) ? -1.0 : 1.0;
    return sign * (p - cp.point) / cp.distance;
  }

  // Three-direction finite-difference estimate: the surface-normal direction
  // contributes a zero difference near the surface; the two random directions
  // are drawn from a generator seeded by the query point, so repeated queries
  // agree and concurrent queries share no state.
  Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double delta) const override {
    const Eigen::Vector3d g0 = gradient(p);
    Rng rng(point_seed(p));
    Eigen::Vector3d d2, d3;
    Eigen::Matrix3d dirs;
    bool ok = false;
    for (int attempt = 0; attempt < 16 && !ok; ++attempt) {
      d2 = rng.unit_vector3();
      d3 = rng.unit_vector3();
      dirs.col(0) = g0;
      dirs.col(1) = d2;
      dirs.col(2) = d3;
      ok = std::abs(dirs.determinant()) >= 1e-6;
    }
    if (!ok) throw SingularDirections("could not draw independent directions");
    Eigen::Matrix3d ys;
    ys.col(0).setZero();
    ys.col(1) = (gradient(p + delta * d2) - g0) / delta;
    ys.col(2) = (gradient(p + delta * d3) - g0) / delta;
    const Eigen::Matrix3d sigma = ys * dirs.inverse();
    return 0.5 * (sigma + sigma.transpose());
  }

  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const override {
    return mesh_.closest_point(p).point;
  }

  double bounding_radius() const override { return bounding_radius_; }

  double default_hessian_delta() const override { return 10.0 * mesh_.mean_edge_length(); }

  Obb local_obb() const override {
    const auto samples = mesh_.sample_surface(8192, 20240u);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& s : samples) cov += (s - mean) * (s - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);

    Obb o;
    o.axes.col(0) = eig.eigenvectors().col(2);  // descending variance
    o.axes.col(1) = eig.eigenvectors().col(1);
    for (int c = 0; c < 2; ++c) {
      int imax;
      o.axes.col(c).cwiseAbs().maxCoeff(&imax);
      if (o.axes.col(c)[imax] < 0.0) o.axes.col(c) = -o.axes.col(c);
    }
    o.axes.col(2) = o.axes.col(0).cross(o.axes.col(1));

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& v : mesh_.vertices()) {
      const Eigen::Vector3d proj = o.axes.transpose() * v;
      lo = lo.cwiseMin(proj);
      hi = hi.cwiseMax(proj);
    }
    o.half_extents = 0.5 * (hi - lo);
    o.center = o.axes * (0.5 * (hi + lo));
    return o;
  }

  const TriangleMesh& mesh() const { return mesh_; }

 private:
  std::uint64_t point_seed(const Eigen::Vector3d& p) const {
    std::uint64_t h = seed_ ^ 0x9E3779B97F4A7C15ULL;
    for (int i = 0; i < 3; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &p[i], 8);
      h ^= bits + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }

  TriangleMesh mesh_;
  std::uint64_t seed_;
  double bounding_radius_ = 0.0;
};

}  // namespace

std::shared_ptr<Shape> make_sphere(double radius) {
  return std::make_shared<SphereShape>(radius);
}
std::shared_ptr<Shape> make_box(const Eigen::Vector3d& half_extents) {
  return std::make_shared<BoxShape>(half_extents);
}
std::shared_ptr<Shape> make_cylinder(double radius, double half_length) {
  return std::make_shared<CylinderShape>(radius, half_length);
}
std::shared_ptr<Shape> make_superellipsoid(const Eigen::Vector3d& half_extents, double e1,
                                           double e2) {
  return std::make_shared<SuperellipsoidShape>(half_extents, e1, e2);
}
std::shared_ptr<Shape> make_mesh_shape(TriangleMesh mesh, std::uint64_t hessian_seed) {
  return std::make_shared<MeshShape>(std::move(mesh), hessian_seed);
}

ObjectModel::ObjectModel(std::shared_ptr<Shape> shape, const Eigen::Isometry3d& pose,
                         double mass_kg, double mu)
    : shape_(std::move(shape)), pose_(pose), mass_(mass_kg), mu_(mu) {
  bounding_radius_ = shape_->bounding_radius();
  local_obb_ = shape_->local_obb();
}

double ObjectModel::value(const Eigen::Vector3d& p) const {
  return shape_->value(pose_.inverse() * p);
}

Eigen::Vector3d ObjectModel::gradient(const Eigen::Vector3d& p) const {
  return pose_.linear() * shape_->gradient(pose_.inverse() * p);
}

Eigen::Matrix3d ObjectModel::hessian(const Eigen::Vector3d& p, double delta) const {
  const Eigen::Matrix3d h = shape_->hessian(pose_.inverse() * p, delta);
  return pose_.linear() * h * pose_.linear().transpose();
}

Eigen::Matrix3d ObjectModel::hessian(const Eigen::Vector3d& p) const {
  return hessian(p, shape_->default_hessian_delta());
}

Eigen::Vector3d ObjectModel::closest_point(const Eigen::Vector3d& p) const {
  return pose_ * shape_->closest_point(pose_.inverse() * p);
}

SdfQuery ObjectModel::query(const Eigen::Vector3d& p) const {
  SdfQuery q;
  q.value = value(p);
  q.gradient = gradient(p);
  q.hessian = hessian(p);
  q.closest_point = closest_point(p);
  return q;
}

Obb ObjectModel::world_obb() const {
  Obb o = local_obb_;
  o.center = pose_ * o.center;
  o.axes = pose_.linear() * o.axes;
  return o;
}

namespace {

Eigen::Isometry3d pose_from_json(const nlohmann::json& j) {
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  if (!j.contains("pose")) return pose;
  const auto& jp = j.at("pose");
  if (jp.contains("position")) {
    const auto v = jp.at("position").get<std::vector<double>>();
    pose.translation() = Eigen::Vector3d(v.at(0), v.at(1), v.at(2));
  }
  if (jp.contains("quat_wxyz")) {
    const auto v = jp.at("quat_wxyz").get<std::vector<double>>();
    Eigen::Quaterniond q(v.at(0), v.at(1), v.at(2), v.at(3));
    if (q.norm() < 1e-12) throw ConfigError("zero quaternion in pose");
    pose.linear() = q.normalized().toRotationMatrix();
  }
  return pose;
}

}  // namespace

ObjectModel load_object_json_text(const std::string& text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("object config parse error: ") + e.what());
  }
  try {
    const auto& g = j.at("geometry");
    const std::string type = g.at("type").get<std::string>();
    std::shared_ptr<Shape> shape;
    if (type == "sphere") {
      shape = make_sphere(g.at("radius").get<double>());
    } else if (type == "box") {
      const auto h = g.at("half_extents").get<std::vector<double>>();
      shape = make_box(Eigen::Vector3d(h.at(0), h.at(1), h.at(2)));
    } else if (type == "cylinder") {
      shape = make_cylinder(g.at("radius").get<double>(), g.at("half_length").get<double>());
    } else if (type == "superellipsoid") {
      const auto h = g.at("half_extents").get<std::vector<double>>();
      shape = make_superellipsoid(Eigen::Vector3d(h.at(0), h.at(1), h.at(2)),
                                  g.at("e1").get<double>(), g.at("e2").get<double>());
    } else if (type == "mesh") {
      const std::filesystem::path mesh_path =
          std::filesystem::path(base_dir) / g.at("path").get<std::string>();
      shape = make_mesh_shape(TriangleMesh::load(mesh_path.string()));
    } else {
      throw ConfigError("unknown geometry type: " + type);
    }
    return ObjectModel(shape, pose_from_json(j), j.at("mass_kg").get<double>(),
                       j.at("mu").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("object config error: ") + e.what());
  }
}

ObjectModel load_object_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open object config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_object_json_text(text, std::filesystem::path(path).parent_path().string());
}

}  // namespace grasp::geom
