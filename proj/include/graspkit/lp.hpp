#pragma once

#include <Eigen/Dense>

namespace grasp::lp {

enum class LpStatus { Optimal, Infeasible, Unbounded, Degenerate };

const char* to_string(LpStatus s);

// Dense LP in the form
//   min  c'x   s.t.  A_eq x = b_eq,  A_in x <= 0,
// with x unrestricted in sign. Inequalities are homogeneous by construction
// of the problems this solver serves.
struct StandardLp {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;  // p x n (may be empty)
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;  // k x n (may be empty)

  int num_vars() const { return static_cast<int>(c.size()); }
  bool dims_consistent() const;
};

// Primal/dual solution. Multiplier conventions follow the Lagrangian
//   L = c'x + lambda'(A_in x) + nu'(A_eq x - b_eq),  lambda >= 0,
// so stationarity reads c + A_in' lambda + A_eq' nu = 0.
struct LpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // inequality duals, size k
  Eigen::VectorXd nu;      // equality duals, size p
  double objective = 0.0;
  LpStatus status = LpStatus::Infeasible;
  int iterations = 0;

  // Degenerate means optimal with a non-unique primal or dual solution.
  bool is_optimal() const { return status == LpStatus::Optimal || status == LpStatus::Degenerate; }
};

struct LpOptions {
  double pivot_tol = 1e-9;       // entering/leaving pivot threshold
  double feas_tol = 1e-8;        // phase-1 objective threshold
  double degeneracy_tol = 1e-10; // basic-at-bound / zero-reduced-cost flag
  int max_iters = 0;             // 0 = automatic from problem size
};

// Two-phase revised simplex with a deterministic pivot rule (Dantzig with
// lowest-index ties, switching permanently to Bland's rule once the iteration
// count suggests cycling). Redundant equality rows are removed up front; their
// duals are reported as zero. Free variables are handled by sign splitting.
LpSolution solve_lp(const StandardLp& lp, const LpOptions& opts = {});

// Max-norm of the stacked stationarity / complementary-slackness /
// primal-feasibility residual at (x, lambda, nu).
double kkt_residual(const StandardLp& lp, const LpSolution& sol);

}  // namespace grasp::lp
