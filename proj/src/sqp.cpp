#include "graspkit/sqp.hpp"

#include <algorithm>
#include <chrono>
#include <deque>

#include "graspkit/qp.hpp"

namespace grasp::sqp {

namespace {

double violation_l1(const NlpEval& e) {
  double v = 0.0;
  for (int i = 0; i < e.c_eq.size(); ++i) v += std::abs(e.c_eq[i]);
  for (int i = 0; i < e.c_in.size(); ++i) v += std::max(0.0, -e.c_in[i]);
  return v;
}

double violation_max(const NlpEval& e) {
  double v = 0.0;
  for (int i = 0; i < e.c_eq.size(); ++i) v = std::max(v, std::abs(e.c_eq[i]));
  for (int i = 0; i < e.c_in.size(); ++i) v = std::max(v, -e.c_in[i]);
  return v;
}

// Subproblem: min 1/2 p'Bp + g'p  s.t.  J_eq p = -c_eq, J_in p >= -c_in,
// lower-x <= p <= upper-x. Returns false if even the elastic form fails.
bool solve_subproblem(const NlpEval& e, const Eigen::MatrixXd& b_mat,
                      const Eigen::VectorXd& x, const NlpProblem& nlp, double elastic_rho,
                      Eigen::VectorXd* step, Eigen::VectorXd* nu, Eigen::VectorXd* lambda) {
  const int n = nlp.n;
  const int me = nlp.num_eq;
  const int mi = nlp.num_in;

  qp::QpProblem pr;
  pr.p = b_mat;
  pr.q = e.grad_f;
  pr.a_eq = e.j_eq;
  pr.b_eq = -e.c_eq;
  pr.a_in.resize(mi + 2 * n, n);
  pr.b_in.resize(mi + 2 * n);
  if (mi > 0) {
    pr.a_in.topRows(mi) = -e.j_in;
    pr.b_in.head(mi) = e.c_in;
  }
  pr.a_in.middleRows(mi, n) = Eigen::MatrixXd::Identity(n, n);
  pr.b_in.segment(mi, n) = nlp.upper - x;
  pr.a_in.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  pr.b_in.tail(n) = x - nlp.lower;

  qp::QpSolution sol = qp::solve_qp(pr);
  if (sol.status == qp::QpStatus::Optimal) {
    *step = sol.x;
    *nu = sol.nu;
    *lambda = sol.lambda.head(mi);
    return true;
  }

  // Elastic relaxation: slacks absorb the linearized constraints so the
  // subproblem is always feasible from p = 0.
  const int ne = n + 2 * me + mi;
  qp::QpProblem el;
  el.p = Eigen::MatrixXd::Zero(ne, ne);
  el.p.topLeftCorner(n, n) = b_mat;
  el.p.diagonal().tail(2 * me + mi).array() += 1e-8;
  el.q = Eigen::VectorXd::Zero(ne);
  el.q.head(n) = e.grad_f;
  el.q.tail(2 * me + mi).setConstant(elastic_rho);

  el.a_eq = Eigen::MatrixXd::Zero(me, ne);
  el.b_eq = -e.c_eq;
  if (me > 0) {
    el.a_eq.leftCols(n) = e.j_eq;
    el.a_eq.block(0, n, me, me) = Eigen::MatrixXd::Identity(me, me);
    el.a_eq.block(0, n + me, me, me) = -Eigen::MatrixXd::Identity(me, me);
  }
  const int rows = mi + 2 * n + (2 * me + mi);
  el.a_in = Eigen::MatrixXd::Zero(rows, ne);
  el.b_in = Eigen::VectorXd::Zero(rows);
  if (mi > 0) {
    el.a_in.topLeftCorner(mi, n) = -e.j_in;
    el.a_in.block(0, n + 2 * me, mi, mi) = -Eigen::MatrixXd::Identity(mi, mi);
    el.b_in.head(mi) = e.c_in;
  }
  el.a_in.block(mi, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  el.b_in.segment(mi, n) = nlp.upper - x;
  el.a_in.block(mi + n, 0, n, n) = -Eigen::MatrixXd::Identity(n, n);
  el.b_in.segment(mi + n, n) = x - nlp.lower;
  el.a_in.bottomRightCorner(2 * me + mi, 2 * me + mi) =
      -Eigen::MatrixXd::Identity(2 * me + mi, 2 * me + mi);

  Eigen::VectorXd hint = Eigen::VectorXd::Zero(ne);
  for (int i = 0; i < me; ++i) {
    hint[n + i] = std::max(-e.c_eq[i], 0.0);
    hint[n + me + i] = std::max(e.c_eq[i], 0.0);
  }
  for (int i = 0; i < mi; ++i) hint[n + 2 * me + i] = std::max(-e.c_in[i], 0.0);

  sol = qp::solve_qp(el, hint);
  if (sol.status != qp::QpStatus::Optimal) return false;
  *step = sol.x.head(n);
  *nu = sol.nu;
  *lambda = sol.lambda.head(mi);
  return true;
}

}  // namespace

SqpResult solve_sqp(const NlpProblem& nlp, const Eigen::VectorXd& x0,
                    const SqpOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  SqpResult res;
  Eigen::VectorXd x = x0.cwiseMax(nlp.lower).cwiseMin(nlp.upper);
  if (nlp.normalize) x = nlp.normalize(x);
  NlpEval e = nlp.eval(x);

  Eigen::MatrixXd b_mat = Eigen::MatrixXd::Identity(nlp.n, nlp.n);
  double mu = opts.penalty_init;
  std::deque<double> merit_memory;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iterations = iter + 1;
    if (elapsed() > opts.time_cap_s) {
      res.status = SqpStatus::Timeout;
      break;
    }

    Eigen::VectorXd step, nu_qp, lambda_qp;
    if (!solve_subproblem(e, b_mat, x, nlp, 10.0 * mu, &step, &nu_qp, &lambda_qp)) {
      res.status = SqpStatus::QpFailure;
      break;
    }

    const double mult_inf = std::max(
        nu_qp.size() ? nu_qp.cwiseAbs().maxCoeff() : 0.0,
        lambda_qp.size() ? lambda_qp.cwiseAbs().maxCoeff() : 0.0);
    mu = std::min(std::max(mu, 1.2 * mult_inf + 1e-3), opts.penalty_max);

    const double viol = violation_l1(e);
    const double step_norm = step.cwiseAbs().maxCoeff();
    if (step_norm < opts.step_tol) {
      if (violation_max(e) < opts.constraint_tol * 10.0 + 1e-12) {
        res.status = SqpStatus::Converged;
        break;
      }
      // Zero step while infeasible: push the penalty before giving up.
      if (mu < opts.penalty_max / 10.0) {
        mu *= 10.0;
        continue;
      }
      res.status = SqpStatus::LineSearchFailure;
      break;
    }

    const double merit0 = e.f + mu * viol;
    merit_memory.push_back(merit0);
    while (static_cast<int>(merit_memory.size()) > opts.nonmonotone_memory)
      merit_memory.pop_front();
    const double merit_ref = *std::max_element(merit_memory.begin(), merit_memory.end());
    const double descent = e.grad_f.dot(step) - mu * viol;

    double alpha = 1.0;
    bool accepted = false;
    NlpEval e_next;
    Eigen::VectorXd x_next;
    for (int ls = 0; ls < 40; ++ls) {
      x_next = x + alpha * step;
      e_next = nlp.eval(x_next);
      const double merit_next = e_next.f + mu * violation_l1(e_next);
      if (std::isfinite(merit_next) &&
          merit_next <= merit_ref + 1e-4 * alpha * std::min(descent, 0.0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-8) break;
    }
    if (!accepted) {
      // Restart the curvature model once; persistent failure terminates.
      if (b_mat.isApprox(Eigen::MatrixXd::Identity(nlp.n, nlp.n))) {
        res.status = SqpStatus::LineSearchFailure;
        break;
      }
      b_mat = Eigen::MatrixXd::Identity(nlp.n, nlp.n);
      continue;
    }

    // Damped BFGS on the Lagrangian gradient.
    Eigen::VectorXd grad_l0 = e.grad_f;
    Eigen::VectorXd grad_l1 = e_next.grad_f;
    if (nlp.num_eq > 0) {
      grad_l0 += e.j_eq.transpose() * nu_qp;
      grad_l1 += e_next.j_eq.transpose() * nu_qp;
    }
    if (nlp.num_in > 0) {
      grad_l0 -= e.j_in.transpose() * lambda_qp;
      grad_l1 -= e_next.j_in.transpose() * lambda_qp;
    }
    const Eigen::VectorXd s = alpha * step;
    Eigen::VectorXd y = grad_l1 - grad_l0;
    const double sbs = s.dot(b_mat * s);
    const double sy = s.dot(y);
    if (sy < 0.2 * sbs && sbs > 0.0) {
      const double theta = 0.8 * sbs / (sbs - sy);
      y = theta * y + (1.0 - theta) * (b_mat * s);
    }
    const double sy_damped = s.dot(y);
    if (sy_damped > 1e-12 && sbs > 1e-14) {
      const Eigen::VectorXd bs = b_mat * s;
      b_mat += y * y.transpose() / sy_damped - bs * bs.transpose() / sbs;
    }

    Eigen::VectorXd normalized =
        nlp.normalize ? nlp.normalize(x_next) : x_next;
    if (nlp.normalize && (normalized - x_next).cwiseAbs().maxCoeff() > 1e-12) {
      // Coordinate rewrap: same point on the manifold, stale curvature.
      b_mat = Eigen::MatrixXd::Identity(nlp.n, nlp.n);
      e_next = nlp.eval(normalized);
    }
    x = normalized;
    e = e_next;
  }

  if (res.status == SqpStatus::MaxIter && elapsed() > opts.time_cap_s)
    res.status = SqpStatus::Timeout;
  res.x = x;
  res.f = e.f;
  res.max_violation = violation_max(e);
  res.wall_time_s = elapsed();
  return res;
}

}  // namespace grasp::sqp
