#include "graspkit/allocation.hpp"

#include <cmath>

namespace grasp::alloc {

Eigen::MatrixXd pyramid_halfspaces(double mu, int n_s) {
  Eigen::Matrix3Xd edges(3, n_s);
  for (int j = 0; j < n_s; ++j) {
    const double th = 2.0 * M_PI * j / n_s;
    edges.col(j) = Eigen::Vector3d(mu * std::cos(th), mu * std::sin(th), 1.0).normalized();
  }
  Eigen::MatrixXd rows(n_s, 3);
  for (int j = 0; j < n_s; ++j) {
    Eigen::Vector3d face = edges.col(j).cross(edges.col((j + 1) % n_s));
    if (face.z() < 0.0) face = -face;  // inward: the cone axis satisfies face'z > 0
    rows.row(j) = -face.normalized().transpose();
  }
  return rows;
}

double default_min_normal_force(double mass_kg) { return mass_kg < 0.01 ? 0.25 : 1.0; }

AllocationResult allocate_forces(const AllocationProblem& pr) {
  const int nv = static_cast<int>(pr.grasp_map.cols());
  const int nc = nv / 3;
  const Eigen::MatrixXd pyramid = pyramid_halfspaces(pr.mu, pr.n_s);

  const bool with_torques = pr.torque_map.rows() > 0;
  const int n_h = static_cast<int>(pr.torque_map.rows());
  const int rows = nc * (pr.n_s + 1) + (with_torques ? 2 * n_h : 0);

  qp::QpProblem qpp;
  qpp.p = 2.0 * pr.grasp_map.transpose() * pr.grasp_map;
  qpp.q = 2.0 * pr.grasp_map.transpose() * pr.w_des;
  qpp.a_eq.resize(0, nv);
  qpp.b_eq.resize(0);
  qpp.a_in = Eigen::MatrixXd::Zero(rows, nv);
  qpp.b_in = Eigen::VectorXd::Zero(rows);

  int r = 0;
  for (int i = 0; i < nc; ++i) {
    qpp.a_in.block(r, 3 * i, pr.n_s, 3) = pyramid;
    r += pr.n_s;
  }
  for (int i = 0; i < nc; ++i) {
    qpp.a_in(r, 3 * i + 2) = -1.0;
    qpp.b_in[r] = -pr.f_min_normal;
    ++r;
  }
  if (with_torques) {
    qpp.a_in.block(r, 0, n_h, nv) = pr.torque_map;
    qpp.b_in.segment(r, n_h) = pr.tau_ub - pr.tau_joint;
    r += n_h;
    qpp.a_in.block(r, 0, n_h, nv) = -pr.torque_map;
    qpp.b_in.segment(r, n_h) = -(pr.tau_lb - pr.tau_joint);
  }

  // Pure normal forces at the floor value satisfy the pyramids; use as hint.
  Eigen::VectorXd hint = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nc; ++i) hint[3 * i + 2] = std::max(pr.f_min_normal, 0.0);

  const qp::QpSolution sol = qp::solve_qp(qpp, hint);
  AllocationResult out;
  out.status = sol.status;
  if (sol.status == qp::QpStatus::Optimal) {
    out.forces = sol.x;
    out.residual = (pr.grasp_map * sol.x + pr.w_des).norm();
  }
  return out;
}

Vector6d pose_error_wrench(const Eigen::Vector3d& p, const Eigen::Vector3d& p_des,
                           const Eigen::Vector3d& p_dot, const Eigen::Matrix3d& r,
                           const Eigen::Matrix3d& r_des, const PoseGains& gains) {
  const Eigen::Matrix3d skew = 0.5 * (r_des.transpose() * r - r.transpose() * r_des);
  const Eigen::Vector3d e_r(skew(2, 1), skew(0, 2), skew(1, 0));
  Vector6d w;
  w.head<3>() = -gains.k_p * (p - p_des) - gains.k_d * p_dot;
  w.tail<3>() = -gains.k_r * e_r;
  return w;
}

}  // namespace grasp::alloc
