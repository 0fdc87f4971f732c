#include "graspkit/qp.hpp"

#include <algorithm>
#include <vector>

#include "graspkit/lp.hpp"

namespace grasp::qp {

namespace {

constexpr double kFeasTol = 1e-9;

// Feasible point via LP on the homogenized system: variables (x, t) with
// A_in x - b_in t <= 0 and t = 1 pinned by an equality row.
std::optional<Eigen::VectorXd> phase1(const QpProblem& pr) {
  const int n = static_cast<int>(pr.q.size());
  const int p = static_cast<int>(pr.a_eq.rows());
  const int k = static_cast<int>(pr.a_in.rows());
  lp::StandardLp lp;
  lp.c = Eigen::VectorXd::Zero(n + 1);
  lp.a_eq = Eigen::MatrixXd::Zero(p + 1, n + 1);
  lp.a_eq.topLeftCorner(p, n) = pr.a_eq;
  if (p > 0) lp.a_eq.col(n).head(p) = -pr.b_eq;
  lp.a_eq(p, n) = 1.0;
  lp.b_eq = Eigen::VectorXd::Zero(p + 1);
  lp.b_eq[p] = 1.0;
  if (k > 0) {
    lp.a_in = Eigen::MatrixXd::Zero(k, n + 1);
    lp.a_in.leftCols(n) = pr.a_in;
    lp.a_in.col(n) = -pr.b_in;
  }
  const lp::LpSolution sol = lp::solve_lp(lp);
  if (!sol.is_optimal()) return std::nullopt;
  return Eigen::VectorXd(sol.x.head(n));
}

bool is_feasible(const QpProblem& pr, const Eigen::VectorXd& x, double tol) {
  if (pr.a_eq.rows() > 0 && (pr.a_eq * x - pr.b_eq).cwiseAbs().maxCoeff() > tol)
    return false;
  if (pr.a_in.rows() > 0 && (pr.a_in * x - pr.b_in).maxCoeff() > tol) return false;
  return true;
}

}  // namespace

QpSolution solve_qp(const QpProblem& pr, const std::optional<Eigen::VectorXd>& x0_hint) {
  const int n = static_cast<int>(pr.q.size());
  const int p = static_cast<int>(pr.a_eq.rows());
  const int k = static_cast<int>(pr.a_in.rows());
  QpSolution sol;
  sol.lambda = Eigen::VectorXd::Zero(k);
  sol.nu = Eigen::VectorXd::Zero(p);

  // Definite curvature floor; also serves as a minimum-norm tiebreak on flat
  // directions of a singular P.
  const double reg = 1e-10 * std::max(1.0, pr.p.cwiseAbs().maxCoeff());
  Eigen::MatrixXd pm = 0.5 * (pr.p + pr.p.transpose());
  pm.diagonal().array() += reg;

  const double scale =
      std::max({1.0, pr.b_eq.size() ? pr.b_eq.cwiseAbs().maxCoeff() : 0.0,
                pr.b_in.size() ? pr.b_in.cwiseAbs().maxCoeff() : 0.0});
  const double feas_tol = kFeasTol * scale;

  // Feasible start: the hint, zero, the least-norm equality solution, or an
  // LP phase 1.
  Eigen::VectorXd x;
  bool have_start = false;
  if (x0_hint && x0_hint->size() == n && is_feasible(pr, *x0_hint, feas_tol)) {
    x = *x0_hint;
    have_start = true;
  }
  if (!have_start) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    if (is_feasible(pr, zero, feas_tol)) {
      x = zero;
      have_start = true;
    }
  }
  if (!have_start && p > 0) {
    const Eigen::VectorXd xe =
        pr.a_eq.transpose() *
        (pr.a_eq * pr.a_eq.transpose())
            .ldlt()
            .solve(pr.b_eq);
    if (is_feasible(pr, xe, feas_tol)) {
      x = xe;
      have_start = true;
    }
  }
  if (!have_start) {
    const auto x0 = phase1(pr);
    if (!x0) {
      sol.status = QpStatus::Infeasible;
      return sol;
    }
    x = *x0;
    have_start = true;
  }

  // Working set over inequality indices; equalities are always active.
  std::vector<int> work;
  std::vector<char> in_work(k, 0);

  const int max_iters = 50 + 12 * (n + k);
  Eigen::VectorXd duals;
  for (int iter = 0; iter < max_iters; ++iter) {
    sol.iterations = iter + 1;
    const int nact = p + static_cast<int>(work.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + nact, n + nact);
    kkt.topLeftCorner(n, n) = pm;
    Eigen::VectorXd rhs(n + nact);
    rhs.head(n) = -(pm * x + pr.q);
    for (int r = 0; r < p; ++r) {
      kkt.block(n + r, 0, 1, n) = pr.a_eq.row(r);
      kkt.block(0, n + r, n, 1) = pr.a_eq.row(r).transpose();
      rhs[n + r] = 0.0;
    }
    for (std::size_t wi = 0; wi < work.size(); ++wi) {
      const int r = n + p + static_cast<int>(wi);
      kkt.block(r, 0, 1, n) = pr.a_in.row(work[wi]);
      kkt.block(0, r, n, 1) = pr.a_in.row(work[wi]).transpose();
      rhs[r] = 0.0;
    }
    const Eigen::VectorXd step_dual = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd step = step_dual.head(n);
    duals = step_dual.tail(nact);

    if (step.cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      // Stationary on the working set; check inequality multipliers.
      int drop = -1;
      double most_negative = -1e-11;
      for (std::size_t wi = 0; wi < work.size(); ++wi) {
        const double u = duals[p + wi];
        if (u < most_negative) {
          most_negative = u;
          drop = static_cast<int>(wi);
        }
      }
      if (drop < 0) {
        sol.x = x;
        sol.nu = duals.head(p);
        for (std::size_t wi = 0; wi < work.size(); ++wi)
          sol.lambda[work[wi]] = std::max(0.0, duals[p + wi]);
        sol.objective = 0.5 * x.dot(pr.p * x) + pr.q.dot(x);
        sol.status = QpStatus::Optimal;
        return sol;
      }
      in_work[work[drop]] = 0;
      work.erase(work.begin() + drop);
      continue;
    }

    // Ratio test against inactive inequalities. Ascending scan with strict
    // improvement keeps the lowest index on ties.
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < k; ++i) {
      if (in_work[i]) continue;
      const double adot = pr.a_in.row(i).dot(step);
      if (adot > 1e-12) {
        const double room = pr.b_in[i] - pr.a_in.row(i).dot(x);
        const double a = std::max(room, 0.0) / adot;
        if (a < alpha) {
          alpha = a;
          blocking = i;
        }
      }
    }
    x += alpha * step;
    if (blocking >= 0 && alpha < 1.0) {
      work.push_back(blocking);
      in_work[blocking] = 1;
    }
  }
  sol.x = x;
  sol.status = QpStatus::IterLimit;
  return sol;
}

QpSolution solve_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                    const Eigen::MatrixXd& a_in, const Eigen::VectorXd& b_in) {
  QpProblem pr;
  pr.p = p;
  pr.q = q;
  pr.a_in = a_in;
  pr.b_in = b_in;
  pr.a_eq.resize(0, q.size());
  pr.b_eq.resize(0);
  return solve_qp(pr);
}

double qp_kkt_residual(const QpProblem& pr, const QpSolution& sol) {
  Eigen::VectorXd stat = pr.p * sol.x + pr.q;
  if (pr.a_in.rows() > 0) stat += pr.a_in.transpose() * sol.lambda;
  if (pr.a_eq.rows() > 0) stat += pr.a_eq.transpose() * sol.nu;
  double r = stat.cwiseAbs().maxCoeff();
  if (pr.a_eq.rows() > 0) r = std::max(r, (pr.a_eq * sol.x - pr.b_eq).cwiseAbs().maxCoeff());
  if (pr.a_in.rows() > 0) {
    const Eigen::VectorXd res = pr.a_in * sol.x - pr.b_in;
    r = std::max(r, res.maxCoeff());
    r = std::max(r, res.cwiseProduct(sol.lambda).cwiseAbs().maxCoeff());
    r = std::max(r, -sol.lambda.minCoeff());
  }
  return r;
}

}  // namespace grasp::qp
