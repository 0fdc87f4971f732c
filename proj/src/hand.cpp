#include "graspkit/hand.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "graspkit/errors.hpp"

namespace grasp::kin {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega) {
  const double th = omega.norm();
  if (th < 1e-12) return Eigen::Matrix3d::Identity() + skew(omega);
  const Eigen::Matrix3d k = skew(omega / th);
  return Eigen::Matrix3d::Identity() + std::sin(th) * k + (1.0 - std::cos(th)) * k * k;
}

// Gallego & Yezzi closed form for the rotation-matrix partials.
Eigen::Matrix3d dexp_so3(const Eigen::Vector3d& omega, int i) {
  const double th2 = omega.squaredNorm();
  const Eigen::Matrix3d r = exp_so3(omega);
  if (th2 < 1e-14) return skew(Eigen::Vector3d::Unit(i)) * r;
  const Eigen::Vector3d ei = Eigen::Vector3d::Unit(i);
  const Eigen::Vector3d v = omega.cross((Eigen::Matrix3d::Identity() - r) * ei);
  return ((omega[i] * skew(omega) + skew(v)) / th2) * r;
}

Eigen::Vector3d wrap_rotation(const Eigen::Vector3d& omega) {
  const double th = omega.norm();
  if (th <= M_PI || th < 1e-12) return omega;
  const double wrapped = std::fmod(th + M_PI, 2.0 * M_PI) - M_PI;
  return omega * (wrapped / th);
}

int HandModel::finger_joint_offset(int finger) const { return finger_offsets_[finger]; }

int HandModel::body_index(int finger, int link) const {
  return 1 + finger_offsets_[finger] + link;
}

int HandModel::tip_body(int finger) const {
  return body_index(finger, static_cast<int>(fingers_[finger].joints.size()) - 1);
}

int HandModel::parent_body(int body) const {
  if (body <= 0) return -1;
  for (int f = 0; f < num_fingers(); ++f) {
    const int first = body_index(f, 0);
    const int last = tip_body(f);
    if (body >= first && body <= last) return body == first ? 0 : body - 1;
  }
  return -1;
}

std::vector<Eigen::Isometry3d> HandModel::body_poses(const Eigen::VectorXd& q) const {
  std::vector<Eigen::Isometry3d> poses(num_bodies());
  Eigen::Isometry3d palm = Eigen::Isometry3d::Identity();
  palm.linear() = exp_so3(q.segment<3>(3));
  palm.translation() = q.head<3>();
  poses[0] = palm;

  for (int f = 0; f < num_fingers(); ++f) {
    Eigen::Isometry3d t = palm;
    const int off = finger_offsets_[f];
    for (std::size_t j = 0; j < fingers_[f].joints.size(); ++j) {
      const Joint& joint = fingers_[f].joints[j];
      const double qj = q[6 + off + static_cast<int>(j)];
      Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
      if (joint.type == Joint::Type::Revolute) {
        local.translation() = joint.origin;
        local.linear() = Eigen::AngleAxisd(qj, joint.axis.normalized()).toRotationMatrix();
      } else {
        local.translation() = joint.origin + qj * joint.axis.normalized();
      }
      t = t * local;
      poses[body_index(f, static_cast<int>(j))] = t;
    }
  }
  return poses;
}

Eigen::Vector3d HandModel::body_point(const Eigen::VectorXd& q, int body,
                                      const Eigen::Vector3d& local) const {
  return body_poses(q)[body] * local;
}

Eigen::Vector3d HandModel::fingertip(const Eigen::VectorXd& q, int finger) const {
  return body_point(q, tip_body(finger), fingers_[finger].tip_offset);
}

Eigen::MatrixXd HandModel::point_jacobian(const Eigen::VectorXd& q, int body,
                                          const Eigen::Vector3d& local) const {
  const auto poses = body_poses(q);
  const Eigen::Vector3d p = poses[body] * local;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, dof());

  jac.leftCols<3>().setIdentity();
  const Eigen::Vector3d omega = q.segment<3>(3);
  // Point expressed in the palm frame; the whole subtree is rigid under palm
  // rotation for fixed finger joints.
  const Eigen::Vector3d v = poses[0].linear().transpose() * (p - poses[0].translation());
  for (int i = 0; i < 3; ++i) jac.col(3 + i) = dexp_so3(omega, i) * v;

  if (body == 0) return jac;
  for (int f = 0; f < num_fingers(); ++f) {
    const int first = body_index(f, 0);
    const int last = tip_body(f);
    if (body < first || body > last) continue;
    const int off = finger_offsets_[f];
    for (int j = 0; j <= body - first; ++j) {
      const Joint& joint = fingers_[f].joints[j];
      // Frame the joint acts in: parent body pose plus the joint offset.
      const Eigen::Isometry3d parent =
          (j == 0) ? poses[0] : poses[body_index(f, j - 1)];
      const Eigen::Vector3d axis_w = parent.linear() * joint.axis.normalized();
      if (joint.type == Joint::Type::Revolute) {
        const Eigen::Vector3d pivot = parent * joint.origin;
        jac.col(6 + off + j) = axis_w.cross(p - pivot);
      } else {
        jac.col(6 + off + j) = axis_w;
      }
    }
    break;
  }
  return jac;
}

Eigen::MatrixXd HandModel::fingertip_jacobian(const Eigen::VectorXd& q, int finger) const {
  return point_jacobian(q, tip_body(finger), fingers_[finger].tip_offset);
}

Eigen::VectorXd HandModel::clamp_to_limits(const Eigen::VectorXd& q) const {
  return q.cwiseMax(q_min_).cwiseMin(q_max_);
}

namespace {

Eigen::Vector3d vec3(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError("expected 3-vector in hand config");
  return {v[0], v[1], v[2]};
}

}  // namespace

HandModel HandModel::load_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("hand config parse error: ") + e.what());
  }
  HandModel hand;
  try {
    hand.name_ = j.value("name", "hand");
    const auto& palm = j.at("palm");
    std::vector<double> lo{-1.0, -1.0, -1.0}, hi{1.0, 1.0, 1.0};
    if (palm.contains("pos_min")) lo = palm.at("pos_min").get<std::vector<double>>();
    if (palm.contains("pos_max")) hi = palm.at("pos_max").get<std::vector<double>>();
    const double rot_limit = palm.value("rot_limit", 2.0 * M_PI);

    std::vector<double> qmin{lo[0], lo[1], lo[2], -rot_limit, -rot_limit, -rot_limit};
    std::vector<double> qmax{hi[0], hi[1], hi[2], rot_limit, rot_limit, rot_limit};

    if (palm.contains("spheres")) {
      for (const auto& s : palm.at("spheres")) {
        CollisionSphere cs;
        cs.body = 0;
        cs.center = vec3(s.at("center"));
        cs.radius = s.at("radius").get<double>();
        hand.spheres_.push_back(cs);
      }
    }

    for (const auto& jf : j.at("fingers")) {
      Finger finger;
      const int f = static_cast<int>(hand.fingers_.size());
      hand.finger_offsets_.push_back(hand.joint_count_);
      int link = 0;
      for (const auto& jj : jf.at("joints")) {
        Joint joint;
        const std::string type = jj.value("type", "revolute");
        joint.type = type == "prismatic" ? Joint::Type::Prismatic : Joint::Type::Revolute;
        joint.axis = vec3(jj.at("axis"));
        joint.origin = vec3(jj.at("origin"));
        const auto lim = jj.at("limits").get<std::vector<double>>();
        joint.limit_lo = lim.at(0);
        joint.limit_hi = lim.at(1);
        qmin.push_back(joint.limit_lo);
        qmax.push_back(joint.limit_hi);
        finger.joints.push_back(joint);

        if (jj.contains("spheres")) {
          for (const auto& s : jj.at("spheres")) {
            CollisionSphere cs;
            cs.body = 1 + hand.joint_count_;
            cs.center = vec3(s.at("center"));
            cs.radius = s.at("radius").get<double>();
            hand.spheres_.push_back(cs);
          }
        }
        ++hand.joint_count_;
        ++link;
      }
      finger.tip_offset = vec3(jf.at("tip_offset"));
      if (jf.contains("tip_sphere")) {
        CollisionSphere cs;
        cs.body = 1 + hand.joint_count_ - 1;
        cs.center = vec3(jf.at("tip_sphere").at("center"));
        cs.radius = jf.at("tip_sphere").at("radius").get<double>();
        cs.fingertip = true;
        hand.spheres_.push_back(cs);
      }
      hand.fingers_.push_back(std::move(finger));
      (void)f;
    }
    hand.q_min_ = Eigen::Map<Eigen::VectorXd>(qmin.data(), qmin.size());
    hand.q_max_ = Eigen::Map<Eigen::VectorXd>(qmax.data(), qmax.size());
    if ((hand.q_min_.array() >= hand.q_max_.array()).any())
      throw ConfigError("hand joint limits must satisfy q_min < q_max");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hand config error: ") + e.what());
  }
  return hand;
}

HandModel HandModel::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open hand config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_json_text(text);
}

std::vector<CollisionPair> collision_pairs(const HandModel& hand,
                                           double fingertip_object_margin,
                                           double safety_margin) {
  std::vector<CollisionPair> pairs;
  const auto& spheres = hand.collision_spheres();
  const int ns = static_cast<int>(spheres.size());

  for (int a = 0; a < ns; ++a) {
    for (int b = a + 1; b < ns; ++b) {
      const int ba = spheres[a].body, bb = spheres[b].body;
      if (ba == bb) continue;
      if (hand.parent_body(ba) == bb || hand.parent_body(bb) == ba) continue;
      CollisionPair p;
      p.type = CollisionPair::Type::SphereSphere;
      p.sphere_a = a;
      p.sphere_b = b;
      p.margin = safety_margin;
      pairs.push_back(p);
    }
  }
  for (int a = 0; a < ns; ++a) {
    CollisionPair p;
    p.type = CollisionPair::Type::SphereObject;
    p.sphere_a = a;
    p.margin = spheres[a].fingertip ? fingertip_object_margin : safety_margin;
    pairs.push_back(p);
  }
  for (int a = 0; a < ns; ++a) {
    CollisionPair p;
    p.type = CollisionPair::Type::SphereTable;
    p.sphere_a = a;
    p.margin = safety_margin;
    pairs.push_back(p);
  }
  return pairs;
}

}  // namespace grasp::kin
