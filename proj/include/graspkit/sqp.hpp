#pragma once

#include <Eigen/Dense>
#include <functional>

namespace grasp::sqp {

// Smooth NLP in the form
//   min f(x)  s.t.  c_eq(x) = 0,  c_in(x) >= 0,  lower <= x <= upper.
struct NlpEval {
  double f = 0.0;
  Eigen::VectorXd grad_f;
  Eigen::VectorXd c_eq;
  Eigen::MatrixXd j_eq;
  Eigen::VectorXd c_in;
  Eigen::MatrixXd j_in;
};

struct NlpProblem {
  int n = 0;
  int num_eq = 0;
  int num_in = 0;
  Eigen::VectorXd lower, upper;
  std::function<NlpEval(const Eigen::VectorXd&)> eval;
  // Optional iterate normalization applied after each accepted step (e.g.
  // rewrapping rotation coordinates). Must not change function values.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> normalize;
};

struct SqpOptions {
  int max_iters = 200;
  double time_cap_s = 10.0;
  double step_tol = 1e-9;
  double constraint_tol = 1e-7;   // used in the convergence test
  double stationarity_tol = 1e-6;
  int nonmonotone_memory = 3;
  double penalty_init = 1.0;
  double penalty_max = 1e8;
};

enum class SqpStatus { Converged, MaxIter, Timeout, LineSearchFailure, QpFailure };

struct SqpResult {
  Eigen::VectorXd x;
  SqpStatus status = SqpStatus::MaxIter;
  int iterations = 0;
  double f = 0.0;
  double max_violation = 0.0;
  double wall_time_s = 0.0;
};

// Line-search SQP with a damped BFGS Lagrangian Hessian, an L1 merit function
// with non-monotone (bounded memory) acceptance, and an elastic QP fallback
// for inconsistent linearizations.
SqpResult solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& x0,
                    const SqpOptions& opts = {});

}  // namespace grasp::sqp
