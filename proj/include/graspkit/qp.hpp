#pragma once

#include <Eigen/Dense>
#include <optional>

namespace grasp::qp {

enum class QpStatus { Optimal, Infeasible, IterLimit };

struct QpProblem {
  Eigen::MatrixXd p;     // symmetric PSD
  Eigen::VectorXd q;
  Eigen::MatrixXd a_eq;  // may be empty
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;  // a_in x <= b_in
  Eigen::VectorXd b_in;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // inequality duals, >= 0
  Eigen::VectorXd nu;      // equality duals
  double objective = 0.0;
  QpStatus status = QpStatus::Infeasible;
  int iterations = 0;
};

// Dense primal active-set solver for small problems. A curvature floor is
// added to P so every equality-constrained subproblem is definite; ties in
// the blocking-constraint choice break to the lowest index. A feasible start
// is found from the hint, from the least-norm equality solution, or by an LP
// phase 1 on the homogenized constraints.
QpSolution solve_qp(const QpProblem& problem,
                    const std::optional<Eigen::VectorXd>& x0_hint = std::nullopt);

// Inequality-only convenience form: min 1/2 x'Px + q'x s.t. A_in x <= b_in.
QpSolution solve_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                    const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in);

double qp_kkt_residual(const QpProblem& problem, const QpSolution& sol);

}  // namespace grasp::qp
