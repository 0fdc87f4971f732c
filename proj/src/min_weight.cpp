#include "graspkit/min_weight.hpp"

#include "graspkit/errors.hpp"

namespace grasp::metric {

lp::StandardLp min_weight_lp(const wrench::WrenchSet& ws) {
  const int m = ws.cols();
  lp::StandardLp lp;
  lp.c = Eigen::VectorXd::Zero(m + 1);
  lp.c[m] = -1.0;  // maximize l
  lp.a_eq = Eigen::MatrixXd::Zero(7, m + 1);
  lp.a_eq.topLeftCorner(6, m) = ws.w;
  lp.a_eq.row(6).head(m).setOnes();
  lp.b_eq = Eigen::VectorXd::Zero(7);
  lp.b_eq[6] = 1.0;
  lp.a_in = Eigen::MatrixXd::Zero(m, m + 1);
  lp.a_in.leftCols(m) = -Eigen::MatrixXd::Identity(m, m);
  lp.a_in.col(m).setOnes();
  return lp;
}

MinWeightSolution solve_min_weight(const wrench::WrenchSet& ws) {
  if (!ws.has_affine_rank7)
    throw NotEnoughWrenches("wrench set lacks 7 affinely independent columns");
  const int m = ws.cols();
  const lp::LpSolution sol = lp::solve_lp(min_weight_lp(ws));

  MinWeightSolution out;
  out.status = sol.status;
  out.degenerate = sol.status == lp::LpStatus::Degenerate;
  if (!sol.is_optimal()) return out;
  out.l_star = sol.x[m];
  out.l_bar = m * out.l_star;
  out.alpha = sol.x.head(m);
  out.lambda = sol.lambda;
  out.nu = sol.nu;
  return out;
}

MetricGradient grad_min_weight(const wrench::WrenchSet& ws, const Eigen::MatrixXd& dwdq,
                               const MinWeightSolution& sol) {
  const int m = ws.cols();
  const int n = static_cast<int>(dwdq.cols());
  const lp::StandardLp lp = min_weight_lp(ws);

  Eigen::MatrixXd c_mat(m + 7, m + 1);
  c_mat.topRows(m) = sol.lambda.asDiagonal() * lp.a_in;
  c_mat.bottomRows(7) = lp.a_eq;

  // d_q H3: only the six wrench-equality rows depend on q.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + 7, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Map<const Eigen::MatrixXd> dw(dwdq.col(k).data(), 6, m);
    rhs.block(m, k, 6, 1) = dw * sol.alpha;
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c_mat);
  const Eigen::MatrixXd dx = -cod.solve(rhs);

  MetricGradient g;
  g.grad = dx.row(m).transpose();
  g.d_alpha = dx.topRows(m);
  g.subgradient = sol.degenerate;
  return g;
}

double kkt_residual(const wrench::WrenchSet& ws, const MinWeightSolution& sol) {
  const lp::StandardLp lp = min_weight_lp(ws);
  Eigen::VectorXd x(ws.cols() + 1);
  x.head(ws.cols()) = sol.alpha;
  x[ws.cols()] = sol.l_star;

  const Eigen::VectorXd h1 =
      lp.c + lp.a_in.transpose() * sol.lambda + lp.a_eq.transpose() * sol.nu;
  const Eigen::VectorXd h2 = sol.lambda.cwiseProduct(lp.a_in * x);
  const Eigen::VectorXd h3 = lp.a_eq * x - lp.b_eq;
  return std::max({h1.cwiseAbs().maxCoeff(), h2.cwiseAbs().maxCoeff(),
                   h3.cwiseAbs().maxCoeff()});
}

}  // namespace grasp::metric
