#include "graspkit/wrench.hpp"

#include <cmath>

#include "graspkit/errors.hpp"

namespace grasp::wrench {

ContactFrame frame_from_normal(const Eigen::Vector3d& position,
                               const Eigen::Vector3d& inward_normal) {
  const double len = inward_normal.norm();
  if (len < 1e-8) throw DegenerateNormal("contact normal has vanishing length");
  ContactFrame f;
  f.position = position;
  f.normal = inward_normal / len;
  Eigen::Vector3d ref = Eigen::Vector3d::UnitZ();
  if (std::abs(f.normal.dot(ref)) > 0.99) ref = Eigen::Vector3d::UnitX();
  f.tangent1 = ref.cross(f.normal).normalized();
  f.tangent2 = f.normal.cross(f.tangent1);
  return f;
}

ContactFrame contact_frame(const geom::ObjectModel& object, const Eigen::Vector3d& p) {
  const Eigen::Vector3d g = object.gradient(p);
  return frame_from_normal(p, -g);
}

FrictionCone cone_edges(const ContactFrame& frame, double mu, int n_s) {
  FrictionCone cone;
  cone.mu = mu;
  cone.sides = n_s;
  cone.edges.resize(3, n_s);
  for (int j = 0; j < n_s; ++j) {
    const double th = 2.0 * M_PI * j / n_s;
    const Eigen::Vector3d e =
        frame.normal + mu * (std::cos(th) * frame.tangent1 + std::sin(th) * frame.tangent2);
    cone.edges.col(j) = e.normalized();
  }
  return cone;
}

WrenchSet build_wrench_set_at(const std::vector<ContactFrame>& contacts, double mu,
                              int n_s, double torque_scale,
                              const Eigen::Vector3d& torque_origin) {
  const int n_c = static_cast<int>(contacts.size());
  WrenchSet ws;
  ws.torque_scale = torque_scale;
  ws.torque_origin = torque_origin;
  ws.w.resize(6, n_c * n_s);
  ws.provenance.reserve(n_c * n_s);
  for (int i = 0; i < n_c; ++i) {
    const FrictionCone cone = cone_edges(contacts[i], mu, n_s);
    const Eigen::Vector3d arm = (contacts[i].position - torque_origin) / torque_scale;
    for (int j = 0; j < n_s; ++j) {
      const Eigen::Vector3d f = cone.edges.col(j);
      ws.w.col(i * n_s + j) << f, arm.cross(f);
      ws.provenance.emplace_back(i, j);
    }
  }
  ws.has_affine_rank7 = has_affine_rank7(ws.w);
  return ws;
}

WrenchSet build_wrench_set(const geom::ObjectModel& object,
                           const std::vector<ContactFrame>& contacts, double mu, int n_s,
                           double torque_scale) {
  return build_wrench_set_at(contacts, mu, n_s, torque_scale, object.origin());
}

Eigen::Matrix<double, 6, Eigen::Dynamic> grasp_map(const std::vector<ContactFrame>& contacts,
                                                   const Eigen::Vector3d& origin) {
  const int n_c = static_cast<int>(contacts.size());
  Eigen::Matrix<double, 6, Eigen::Dynamic> g(6, 3 * n_c);
  for (int i = 0; i < n_c; ++i) {
    const Eigen::Matrix3d r = contacts[i].rotation();
    const Eigen::Vector3d arm = contacts[i].position - origin;
    g.block<3, 3>(0, 3 * i) = r;
    for (int c = 0; c < 3; ++c) g.block<3, 1>(3, 3 * i + c) = arm.cross(r.col(c));
  }
  return g;
}

bool has_affine_rank7(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w) {
  Eigen::MatrixXd lifted(7, w.cols());
  lifted.topRows(6) = w;
  lifted.row(6).setOnes();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lifted);
  qr.setThreshold(1e-10);
  return qr.rank() == 7;
}

}  // namespace grasp::wrench
