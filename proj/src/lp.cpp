#include "graspkit/lp.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace grasp::lp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::Degenerate: return "Degenerate";
  }
  return "?";
}

bool StandardLp::dims_consistent() const {
  const int n = num_vars();
  if (a_eq.size() > 0 && a_eq.cols() != n) return false;
  if (a_eq.rows() != b_eq.size()) return false;
  if (a_in.size() > 0 && a_in.cols() != n) return false;
  return true;
}

namespace {

// Gaussian elimination on [A_eq | b_eq] to find a maximal independent row set.
// Returns indices of retained rows; sets infeasible if a dependent row has an
// inconsistent right-hand side.
std::vector<int> independent_rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  double tol, bool* infeasible) {
  *infeasible = false;
  const int p = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  std::vector<int> kept;
  if (p == 0) return kept;

  Eigen::MatrixXd m(p, n + 1);
  m.leftCols(n) = a;
  m.col(n) = b;
  std::vector<int> row_of(p);
  for (int i = 0; i < p; ++i) row_of[i] = i;

  int rank = 0;
  for (int col = 0; col < n && rank < p; ++col) {
    int piv = -1;
    double best = tol;
    for (int r = rank; r < p; ++r) {
      if (std::abs(m(r, col)) > best) {
        best = std::abs(m(r, col));
        piv = r;
      }
    }
    if (piv < 0) continue;
    m.row(piv).swap(m.row(rank));
    std::swap(row_of[piv], row_of[rank]);
    for (int r = rank + 1; r < p; ++r) {
      const double f = m(r, col) / m(rank, col);
      if (f != 0.0) m.row(r) -= f * m.row(rank);
    }
    kept.push_back(row_of[rank]);
    ++rank;
  }
  for (int r = rank; r < p; ++r) {
    if (std::abs(m(r, n)) > 1e-7 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      *infeasible = true;
      return kept;
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

struct Tableau {
  // Standard-form data: min cost'z, rows_a z = rhs, z >= 0.
  Eigen::MatrixXd a;
  Eigen::VectorXd rhs;
  Eigen::VectorXd cost;
  std::vector<int> basis;  // basic column per row

  int rows() const { return static_cast<int>(a.rows()); }
  int cols() const { return static_cast<int>(a.cols()); }
};

enum class PivotResult { Optimal, Unbounded, Stepped, IterLimit };

// One simplex phase on the given cost vector. `allowed` masks columns that may
// enter. Deterministic: Dantzig rule with lowest-index ties, then a permanent
// switch to Bland's rule after `bland_after` iterations.
PivotResult run_simplex(Tableau& t, const std::vector<bool>& allowed, double pivot_tol,
                        int max_iters, int bland_after, int* iters,
                        Eigen::VectorXd* x_basic) {
  const int mrows = t.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd b_mat(mrows, mrows);
  Eigen::VectorXd xb = *x_basic;

  for (; *iters < max_iters; ++(*iters)) {
    for (int r = 0; r < mrows; ++r) b_mat.col(r) = t.a.col(t.basis[r]);
    lu.compute(b_mat);
    xb = lu.solve(t.rhs);

    Eigen::VectorXd cb(mrows);
    for (int r = 0; r < mrows; ++r) cb[r] = t.cost[t.basis[r]];
    const Eigen::VectorXd y = lu.transpose().solve(cb);

    const bool bland = (*iters >= bland_after);
    int enter = -1;
    double best_rc = -pivot_tol;
    for (int j = 0; j < t.cols(); ++j) {
      if (!allowed[j]) continue;
      bool is_basic = false;
      for (int r = 0; r < mrows; ++r)
        if (t.basis[r] == j) { is_basic = true; break; }
      if (is_basic) continue;
      const double rc = t.cost[j] - y.dot(t.a.col(j));
      if (bland) {
        if (rc < -pivot_tol) { enter = j; break; }
      } else if (rc < best_rc) {
        best_rc = rc;
        enter = j;
      }
    }
    if (enter < 0) {
      *x_basic = xb;
      return PivotResult::Optimal;
    }

    const Eigen::VectorXd d = lu.solve(t.a.col(enter));
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < mrows; ++r) {
      if (d[r] > pivot_tol) {
        const double ratio = std::max(xb[r], 0.0) / d[r];
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leave < 0 || t.basis[r] < t.basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) {
      *x_basic = xb;
      return PivotResult::Unbounded;
    }
    t.basis[leave] = enter;
  }
  *x_basic = xb;
  return PivotResult::IterLimit;
}

}  // namespace

LpSolution solve_lp(const StandardLp& lp, const LpOptions& opts) {
  LpSolution sol;
  const int n = lp.num_vars();
  const int k = static_cast<int>(lp.a_in.rows());
  sol.x = Eigen::VectorXd::Zero(n);
  sol.lambda = Eigen::VectorXd::Zero(k);
  sol.nu = Eigen::VectorXd::Zero(lp.a_eq.rows());
  if (!lp.dims_consistent()) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  bool infeasible_rows = false;
  const std::vector<int> eq_rows =
      independent_rows(lp.a_eq, lp.b_eq, 1e-11, &infeasible_rows);
  if (infeasible_rows) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  const int p = static_cast<int>(eq_rows.size());
  const int mrows = p + k;
  const int n_struct = 2 * n;           // x = x+ - x-
  const int n_cols = n_struct + k;      // + slacks
  const int n_total = n_cols + mrows;   // + artificials

  Tableau t;
  t.a = Eigen::MatrixXd::Zero(mrows, n_total);
  t.rhs = Eigen::VectorXd::Zero(mrows);
  std::vector<double> row_sign(mrows, 1.0);

  for (int r = 0; r < p; ++r) {
    t.a.block(r, 0, 1, n) = lp.a_eq.row(eq_rows[r]);
    t.a.block(r, n, 1, n) = -lp.a_eq.row(eq_rows[r]);
    t.rhs[r] = lp.b_eq[eq_rows[r]];
  }
  for (int r = 0; r < k; ++r) {
    t.a.block(p + r, 0, 1, n) = lp.a_in.row(r);
    t.a.block(p + r, n, 1, n) = -lp.a_in.row(r);
    t.a(p + r, n_struct + r) = 1.0;  // slack: A_in x + s = 0
  }
  for (int r = 0; r < mrows; ++r) {
    if (t.rhs[r] < 0.0) {
      t.a.row(r) = -t.a.row(r);
      t.rhs[r] = -t.rhs[r];
      row_sign[r] = -1.0;
    }
    t.a(r, n_cols + r) = 1.0;  // artificial
  }

  const int max_iters =
      opts.max_iters > 0 ? opts.max_iters : 200 + 40 * (mrows + n_cols);
  const int bland_after = 100 + 10 * (mrows + n_cols);
  int iters = 0;

  // Phase 1: minimize the artificial sum.
  t.cost = Eigen::VectorXd::Zero(n_total);
  t.cost.tail(mrows).setOnes();
  t.basis.resize(mrows);
  for (int r = 0; r < mrows; ++r) t.basis[r] = n_cols + r;
  std::vector<bool> allowed(n_total, true);

  Eigen::VectorXd xb = t.rhs;
  PivotResult pr = run_simplex(t, allowed, opts.pivot_tol, max_iters, bland_after,
                               &iters, &xb);
  sol.iterations = iters;
  if (pr == PivotResult::IterLimit) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  double phase1_obj = 0.0;
  for (int r = 0; r < mrows; ++r)
    if (t.basis[r] >= n_cols) phase1_obj += std::max(xb[r], 0.0);
  const double scale = std::max(1.0, lp.b_eq.size() ? lp.b_eq.cwiseAbs().maxCoeff() : 0.0);
  if (phase1_obj > opts.feas_tol * scale) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  // Drive leftover artificials out of the basis; rows with no eligible pivot
  // are redundant within tolerance and keep a harmless artificial at zero.
  {
    Eigen::MatrixXd b_mat(mrows, mrows);
    for (int r = 0; r < mrows; ++r) {
      if (t.basis[r] < n_cols) continue;
      for (int rr = 0; rr < mrows; ++rr) b_mat.col(rr) = t.a.col(t.basis[rr]);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(b_mat);
      int swap_col = -1;
      for (int j = 0; j < n_cols; ++j) {
        bool is_basic = false;
        for (int rr = 0; rr < mrows; ++rr)
          if (t.basis[rr] == j) { is_basic = true; break; }
        if (is_basic) continue;
        const Eigen::VectorXd d = lu.solve(t.a.col(j));
        if (std::abs(d[r]) > 1e-7) { swap_col = j; break; }
      }
      if (swap_col >= 0) t.basis[r] = swap_col;
    }
  }

  // Phase 2: original cost, artificials barred from entering.
  t.cost.setZero();
  t.cost.head(n) = lp.c;
  t.cost.segment(n, n) = -lp.c;
  for (int j = n_cols; j < n_total; ++j) allowed[j] = false;

  pr = run_simplex(t, allowed, opts.pivot_tol, max_iters, bland_after, &iters, &xb);
  sol.iterations = iters;
  if (pr == PivotResult::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  if (pr == PivotResult::IterLimit) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }

  // Recover primal, duals, and the degeneracy flags.
  Eigen::MatrixXd b_mat(mrows, mrows);
  for (int r = 0; r < mrows; ++r) b_mat.col(r) = t.a.col(t.basis[r]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b_mat);
  xb = lu.solve(t.rhs);
  Eigen::VectorXd cb(mrows);
  for (int r = 0; r < mrows; ++r) cb[r] = t.cost[t.basis[r]];
  const Eigen::VectorXd y = lu.transpose().solve(cb);

  for (int r = 0; r < mrows; ++r) {
    const int j = t.basis[r];
    if (j < n) sol.x[j] += xb[r];
    else if (j < n_struct) sol.x[j - n] -= xb[r];
  }
  // nu = -y on equality rows, lambda = -y on inequality rows, undoing any
  // phase-1 row sign flip.
  for (int r = 0; r < p; ++r) sol.nu[eq_rows[r]] = -row_sign[r] * y[r];
  for (int r = 0; r < k; ++r) sol.lambda[r] = std::max(0.0, -row_sign[p + r] * y[p + r]);
  sol.objective = lp.c.dot(sol.x);

  // Degeneracy: a basic slack at its bound (weakly active constraint) or a
  // nonbasic column with zero reduced cost (multiple optima). The sign-split
  // twin of a basic structural column always prices at zero and is skipped,
  // as x_i itself is unbounded in the original problem.
  bool degenerate = false;
  std::vector<char> basic(n_total, 0);
  for (int r = 0; r < mrows; ++r) basic[t.basis[r]] = 1;
  for (int r = 0; r < mrows; ++r) {
    if (t.basis[r] >= n_struct && t.basis[r] < n_cols && std::abs(xb[r]) < opts.degeneracy_tol)
      degenerate = true;
  }
  for (int j = 0; j < n_cols && !degenerate; ++j) {
    if (basic[j]) continue;
    if (j < n_struct) {
      const int twin = (j < n) ? j + n : j - n;
      if (basic[twin]) continue;
      if (lp.c.size() && lp.c[j % n] == 0.0 && t.a.col(j).isZero(0.0)) continue;
    }
    const double rc = t.cost[j] - y.dot(t.a.col(j));
    if (std::abs(rc) < opts.degeneracy_tol) degenerate = true;
  }

  sol.status = degenerate ? LpStatus::Degenerate : LpStatus::Optimal;
  return sol;
}

double kkt_residual(const StandardLp& lp, const LpSolution& sol) {
  double r = 0.0;
  Eigen::VectorXd stat = lp.c;
  if (lp.a_in.rows() > 0) stat += lp.a_in.transpose() * sol.lambda;
  if (lp.a_eq.rows() > 0) stat += lp.a_eq.transpose() * sol.nu;
  r = stat.cwiseAbs().maxCoeff();
  if (lp.a_eq.rows() > 0) {
    r = std::max(r, (lp.a_eq * sol.x - lp.b_eq).cwiseAbs().maxCoeff());
  }
  if (lp.a_in.rows() > 0) {
    const Eigen::VectorXd ax = lp.a_in * sol.x;
    r = std::max(r, ax.cwiseProduct(sol.lambda).cwiseAbs().maxCoeff());
    r = std::max(r, ax.maxCoeff());  // primal violation
    r = std::max(r, -sol.lambda.minCoeff());
  }
  return r;
}

}  // namespace grasp::lp
