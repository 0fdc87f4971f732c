#include <doctest.h>

#include <Eigen/Dense>

#include "graspkit/errors.hpp"
#include "graspkit/min_weight.hpp"
#include "graspkit/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace grasp;
using namespace grasp::metric;

namespace {

// Linear wrench-matrix family W(q) = W0 + sum_k q_k B_k, for gradient tests
// without the kinematics chain.
struct LinearFamily {
  Eigen::MatrixXd w0;
  std::vector<Eigen::MatrixXd> basis;

  wrench::WrenchSet at(const Eigen::VectorXd& q) const {
    Eigen::MatrixXd w = w0;
    for (int k = 0; k < q.size(); ++k) w += q[k] * basis[k];
    return test::wrench_set_from_matrix(w);
  }

  Eigen::MatrixXd dwdq() const {
    const int m = static_cast<int>(w0.cols());
    Eigen::MatrixXd d(6 * m, basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k)
      d.col(k) = Eigen::Map<const Eigen::VectorXd>(basis[k].data(), 6 * m);
    return d;
  }
};

LinearFamily random_family(Rng& rng, int m, int n) {
  LinearFamily fam;
  fam.w0 = test::points_origin_interior(6, m, rng);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd b(6, m);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < m; ++j) b(i, j) = rng.uniform(-0.3, 0.3);
    fam.basis.push_back(b);
  }
  return fam;
}

// D_q x* from the full implicit-differentiation linear system, with every
// partial (including the stationarity block) assembled. Independent of the
// pseudoinverse shortcut in the library.
Eigen::MatrixXd full_kkt_gradient(const wrench::WrenchSet& ws, const Eigen::MatrixXd& dwdq,
                                  const MinWeightSolution& sol) {
  const int m = ws.cols();
  const int n = static_cast<int>(dwdq.cols());
  const lp::StandardLp lp = min_weight_lp(ws);
  const int nx = m + 1, nl = m, nn = 7;

  Eigen::VectorXd x(nx);
  x.head(m) = sol.alpha;
  x[m] = sol.l_star;

  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(nx + nl + nn, nx + nl + nn);
  omega.block(0, nx, nx, nl) = lp.a_in.transpose();
  omega.block(0, nx + nl, nx, nn) = lp.a_eq.transpose();
  omega.block(nx, 0, nl, nx) = sol.lambda.asDiagonal() * lp.a_in;
  omega.block(nx, nx, nl, nl) = (lp.a_in * x).asDiagonal();
  omega.block(nx + nl, 0, nn, nx) = lp.a_eq;

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nx + nl + nn, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Map<const Eigen::MatrixXd> dw(dwdq.col(k).data(), 6, m);
    // dH1 = (d A_eq)' nu over wrench rows, dH3 = (d A_eq) x.
    rhs.block(0, k, m, 1) = dw.transpose() * sol.nu.head(6);
    rhs.block(nx + nl, k, 6, 1) = dw * sol.alpha;
  }
  return (-omega.partialPivLu().solve(rhs)).topRows(nx);
}

}  // namespace

TEST_SUITE("min_weight") {

TEST_CASE("cross-polytope: uniform weights at the 1/m ceiling") {
  const wrench::WrenchSet ws = test::cross_polytope();
  const MinWeightSolution sol = solve_min_weight(ws);
  REQUIRE(sol.optimal());
  CHECK(sol.l_star == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
  CHECK(sol.l_bar == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((sol.alpha.array() - 1.0 / 12.0).abs().maxCoeff() <= 1e-8);
  CHECK(sol.alpha.sum() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK((ws.w * sol.alpha).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(sol.alpha.minCoeff() == doctest::Approx(sol.l_star).epsilon(1e-8));
}

TEST_CASE("shifted columns put the origin outside") {
  Eigen::MatrixXd w = test::cross_polytope().w;
  w.row(0).array() += 5.0;
  const MinWeightSolution sol = solve_min_weight(test::wrench_set_from_matrix(w));
  REQUIRE(sol.optimal());
  CHECK(sol.l_star < 0.0);
}

TEST_CASE("missing affine-independence hypothesis raises") {
  // Columns confined to a hyperplane: rank([W; 1]) < 7.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(6, 10);
  Rng rng(3);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 5; ++i) w(i, j) = rng.uniform(-1.0, 1.0);
  CHECK_THROWS_AS(solve_min_weight(test::wrench_set_from_matrix(w)), NotEnoughWrenches);
}

TEST_CASE("random 16-column sets match the vertex-enumeration oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::MatrixXd w(6, 16);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 16; ++j) w(i, j) = rng.uniform(-1.0, 1.0);
    const wrench::WrenchSet ws = test::wrench_set_from_matrix(w);
    if (!ws.has_affine_rank7) continue;
    const MinWeightSolution sol = solve_min_weight(ws);
    REQUIRE(sol.optimal());
    const auto oracle = test::lp_vertex_enumeration(min_weight_lp(ws));
    REQUIRE(oracle.found);
    CHECK(sol.l_star == doctest::Approx(-oracle.objective).epsilon(1e-7));
    CHECK(sol.l_star <= 1.0 / 16.0 + 1e-12);
  }
}

TEST_CASE("upper bound l <= 1/m and feasibility under rank hypothesis") {
  Rng rng(51);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = rng.uniform_int(8, 20);
    Eigen::MatrixXd w(6, m);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < m; ++j) w(i, j) = rng.uniform(-1.0, 1.0);
    const wrench::WrenchSet ws = test::wrench_set_from_matrix(w);
    if (!ws.has_affine_rank7) continue;
    const MinWeightSolution sol = solve_min_weight(ws);
    REQUIRE(sol.optimal());
    CHECK(sol.l_star <= 1.0 / m + 1e-12);
  }
}

TEST_CASE("trichotomy on constructed sets") {
  Rng rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const auto interior = test::points_origin_interior(6, 14, rng);
    const auto exterior = test::points_origin_exterior(6, 14, rng);
    const auto boundary = test::points_origin_boundary(6, 14, rng);
    const auto si = solve_min_weight(test::wrench_set_from_matrix(interior));
    const auto se = solve_min_weight(test::wrench_set_from_matrix(exterior));
    const auto sb = solve_min_weight(test::wrench_set_from_matrix(boundary));
    CHECK(si.l_star > 1e-6);
    CHECK(se.l_star < -1e-6);
    CHECK(std::abs(sb.l_star) <= 1e-6);
  }
}

TEST_CASE("gradient is zero for coordinates the wrench set ignores") {
  Rng rng(77);
  LinearFamily fam = random_family(rng, 14, 5);
  fam.basis[2].setZero();
  const Eigen::VectorXd q = Eigen::VectorXd::Zero(5);
  const wrench::WrenchSet ws = fam.at(q);
  const MinWeightSolution sol = solve_min_weight(ws);
  REQUIRE(sol.optimal());
  const MetricGradient g = grad_min_weight(ws, fam.dwdq(), sol);
  CHECK(std::abs(g.grad[2]) <= 1e-10);
}

TEST_CASE("gradient matches finite differences on non-degenerate instances") {
  Rng rng(1001);
  int checked = 0;
  for (int trial = 0; trial < 30 && checked < 10; ++trial) {
    const LinearFamily fam = random_family(rng, 13, 5);
    Eigen::VectorXd q(5);
    for (int k = 0; k < 5; ++k) q[k] = rng.uniform(-0.1, 0.1);
    const wrench::WrenchSet ws = fam.at(q);
    if (!ws.has_affine_rank7) continue;
    const MinWeightSolution sol = solve_min_weight(ws);
    if (!sol.optimal() || sol.degenerate) continue;

    const MetricGradient g = grad_min_weight(ws, fam.dwdq(), sol);
    const auto fd = test::fd_gradient(
        [&](const Eigen::VectorXd& qq) {
          return solve_min_weight(fam.at(qq)).l_star;
        },
        q, 1e-6);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((g.grad - fd).cwiseAbs().maxCoeff() / scale <= 1e-4);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("pseudoinverse shortcut equals the full KKT linear-system solve") {
  Rng rng(31016);
  int checked = 0;
  for (int trial = 0; trial < 30 && checked < 10; ++trial) {
    const LinearFamily fam = random_family(rng, 12, 4);
    Eigen::VectorXd q(4);
    for (int k = 0; k < 4; ++k) q[k] = rng.uniform(-0.1, 0.1);
    const wrench::WrenchSet ws = fam.at(q);
    if (!ws.has_affine_rank7) continue;
    const MinWeightSolution sol = solve_min_weight(ws);
    if (!sol.optimal() || sol.degenerate) continue;

    const MetricGradient g = grad_min_weight(ws, fam.dwdq(), sol);
    const Eigen::MatrixXd full = full_kkt_gradient(ws, fam.dwdq(), sol);
    CHECK((g.grad.transpose() - full.row(ws.cols())).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((g.d_alpha - full.topRows(ws.cols())).cwiseAbs().maxCoeff() <= 1e-8);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("degenerate instances are flagged and still return a value") {
  const wrench::WrenchSet ws = test::cross_polytope();
  const MinWeightSolution sol = solve_min_weight(ws);
  REQUIRE(sol.optimal());
  CHECK(sol.degenerate);  // symmetric vertex with an overdetermined active set
  Eigen::MatrixXd dwdq = Eigen::MatrixXd::Zero(6 * 12, 3);
  const MetricGradient g = grad_min_weight(ws, dwdq, sol);
  CHECK(g.subgradient);
  CHECK(g.grad.size() == 3);
}

TEST_CASE("kkt residual at optimum, after perturbation, and with zeroed duals") {
  Rng rng(88);
  const auto pts = test::points_origin_interior(6, 12, rng);
  const wrench::WrenchSet ws = test::wrench_set_from_matrix(pts);
  MinWeightSolution sol = solve_min_weight(ws);
  REQUIRE(sol.optimal());
  CHECK(kkt_residual(ws, sol) <= 1e-8);

  MinWeightSolution bumped = sol;
  bumped.alpha[0] += 1e-3;
  CHECK(kkt_residual(ws, bumped) >= 1e-4);

  MinWeightSolution zeroed = sol;
  zeroed.lambda.setZero();
  CHECK(kkt_residual(ws, zeroed) > 1e-6);
}

}  // TEST_SUITE
