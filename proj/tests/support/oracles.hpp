#pragma once

// Test-side reference implementations, kept independent of the library code
// paths they check.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "graspkit/lp.hpp"

namespace grasp::test {

struct VertexLpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;
  double objective = std::numeric_limits<double>::infinity();
  bool found = false;
};

// Brute-force LP oracle: enumerate every basic solution (all equalities plus
// each (n - p)-subset of the homogeneous inequalities taken as active), keep
// the feasible one with the best objective. Duals are recovered from the
// active set by a least-squares stationarity solve. Exponential, test-only.
inline VertexLpResult lp_vertex_enumeration(const grasp::lp::StandardLp& lp,
                                            double feas_tol = 1e-9) {
  const int n = lp.num_vars();
  const int p = static_cast<int>(lp.a_eq.rows());
  const int k = static_cast<int>(lp.a_in.rows());
  const int extra = n - p;
  VertexLpResult best;

  std::vector<int> subset(extra);
  std::function<void(int, int)> recurse = [&](int start, int depth) {
    if (depth == extra) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd rhs(n);
      m.topRows(p) = lp.a_eq;
      rhs.head(p) = lp.b_eq;
      for (int i = 0; i < extra; ++i) {
        m.row(p + i) = lp.a_in.row(subset[i]);
        rhs[p + i] = 0.0;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(rhs);
      if (k > 0 && (lp.a_in * x).maxCoeff() > feas_tol) return;
      const double obj = lp.c.dot(x);
      if (obj < best.objective - 1e-12) {
        best.objective = obj;
        best.x = x;
        best.found = true;
        // Stationarity on the active set: [A_act' A_eq'] [lam_act; nu] = -c.
        Eigen::MatrixXd at(n, extra + p);
        for (int i = 0; i < extra; ++i) at.col(i) = lp.a_in.row(subset[i]).transpose();
        at.rightCols(p) = lp.a_eq.transpose();
        const Eigen::VectorXd mult = at.colPivHouseholderQr().solve(-lp.c);
        best.lambda = Eigen::VectorXd::Zero(k);
        for (int i = 0; i < extra; ++i) best.lambda[subset[i]] = mult[i];
        best.nu = mult.tail(p);
      }
      return;
    }
    for (int j = start; j <= k - (extra - depth); ++j) {
      subset[depth] = j;
      recurse(j + 1, depth + 1);
    }
  };
  if (extra >= 0 && extra <= k) recurse(0, 0);
  return best;
}

// Central finite differences of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Central finite differences of a vector function, returned as a Jacobian.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = x[i] - h;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = x[i];
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

}  // namespace grasp::test
