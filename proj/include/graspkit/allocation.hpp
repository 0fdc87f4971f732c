#pragma once

#include <Eigen/Dense>

#include "graspkit/qp.hpp"

namespace grasp::alloc {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Contact-force allocation: find local contact forces whose net wrench
// cancels a desired disturbance, inside inscribed friction pyramids, above a
// minimum normal force, and inside joint-torque limits when supplied.
struct AllocationProblem {
  Eigen::Matrix<double, 6, Eigen::Dynamic> grasp_map;  // 6 x 3nc
  Vector6d w_des = Vector6d::Zero();                   // wrench to resist
  double mu = 0.7;
  int n_s = 4;
  double f_min_normal = 1.0;           // newtons, per contact
  Eigen::MatrixXd torque_map;          // n_h x 3nc rows of J_i' R_i; may be empty
  Eigen::VectorXd tau_lb, tau_ub;      // torque limits
  Eigen::VectorXd tau_joint;           // baseline joint torques
};

// Half-space rows L (n_s x 3, local t1/t2/n coordinates) with L f <= 0 iff f
// lies in the pyramid spanned by the cone edges. The edge pyramid is
// inscribed in the exact cone, so pyramid membership certifies
// ||f_t|| <= mu f_n; conversely any f with ||f_t|| <= mu cos(pi/n_s) f_n is
// inside the pyramid.
Eigen::MatrixXd pyramid_halfspaces(double mu, int n_s);

struct AllocationResult {
  Eigen::VectorXd forces;  // 3nc, local coordinates per contact
  double residual = 0.0;   // ||G F + w_des||
  qp::QpStatus status = qp::QpStatus::Infeasible;
};

AllocationResult allocate_forces(const AllocationProblem& problem);

double default_min_normal_force(double mass_kg);  // lighter objects get less

struct PoseGains {
  double k_p = 50.0;
  double k_d = 5.0;
  double k_r = 50.0;
};

// Error wrench from a pose discrepancy: proportional-derivative force plus a
// rotation term from the skew-symmetric part of R_des' R. The angular-rate
// damping term needs a measured angular velocity and is not included.
Vector6d pose_error_wrench(const Eigen::Vector3d& p, const Eigen::Vector3d& p_des,
                           const Eigen::Vector3d& p_dot, const Eigen::Matrix3d& r,
                           const Eigen::Matrix3d& r_des, const PoseGains& gains = {});

}  // namespace grasp::alloc
