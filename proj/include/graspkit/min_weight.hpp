#pragma once

#include <Eigen/Dense>

#include "graspkit/lp.hpp"
#include "graspkit/wrench.hpp"

namespace grasp::metric {

// Solution of the min-weight program over weights alpha and scalar l:
//   max l  s.t.  W alpha = 0,  1'alpha = 1,  alpha >= l 1.
// The sign of l_star classifies force closure: negative iff the origin lies
// outside conv(W), positive iff strictly inside, zero on the boundary.
struct MinWeightSolution {
  double l_star = 0.0;
  double l_bar = 0.0;  // m * l_star, normalized to (-inf, 1]
  Eigen::VectorXd alpha;
  Eigen::VectorXd lambda;  // m duals of alpha >= l 1
  Eigen::VectorXd nu;      // 7 duals: 6 wrench rows + weight-sum row
  bool degenerate = false;
  lp::LpStatus status = lp::LpStatus::Infeasible;

  bool optimal() const { return status == lp::LpStatus::Optimal || degenerate; }
};

struct MetricGradient {
  Eigen::VectorXd grad;     // d l_star / d q
  Eigen::MatrixXd d_alpha;  // m x n
  bool subgradient = false; // degenerate optimum; treat as a subgradient
};

// LP encoding with x = (alpha, l): c = (0, ..., 0, -1),
// A_eq = [[W, 0], [1', 0]], b_eq = (0, 1), A_in = [-I, 1].
lp::StandardLp min_weight_lp(const wrench::WrenchSet& ws);

// Throws NotEnoughWrenches when no 7-subset of affinely independent columns
// exists (the LP may then be infeasible).
MinWeightSolution solve_min_weight(const wrench::WrenchSet& ws);

// Gradient by implicit differentiation of the KKT system, using the
// pseudoinverse reduction
//   D_q x* = -[diag(lambda) A_in; A_eq]^+ [0; d_q H3],
// where d_q H3 stacks (dW/dq_k) alpha* over coordinates. `dwdq` holds
// vec(dW/dq_k) as column k (6m x n, column-major 6 x m blocks).
MetricGradient grad_min_weight(const wrench::WrenchSet& ws, const Eigen::MatrixXd& dwdq,
                               const MinWeightSolution& sol);

// Max-norm of the stacked stationarity / complementary-slackness / primal
// residual at the solution.
double kkt_residual(const wrench::WrenchSet& ws, const MinWeightSolution& sol);

}  // namespace grasp::metric
