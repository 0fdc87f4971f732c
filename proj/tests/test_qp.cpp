#include <doctest.h>

#include <Eigen/Dense>

#include "graspkit/qp.hpp"
#include "graspkit/rng.hpp"

using namespace grasp;
using namespace grasp::qp;

namespace {

// Projected gradient on box constraints, run to convergence. Test-only
// reference for the active-set path.
Eigen::VectorXd projected_gradient_box(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                       int iters) {
  const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p)
                                .eigenvalues()
                                .maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(q.size()).cwiseMax(lo).cwiseMin(hi);
  for (int i = 0; i < iters; ++i)
    x = (x - step * (p * x + q)).cwiseMax(lo).cwiseMin(hi);
  return x;
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("unconstrained projection onto a point") {
  const Eigen::Vector3d a(0.3, -1.2, 2.0);
  // min ||x - a||^2 = x'Ix - 2a'x + const
  const QpSolution sol = solve_qp(2.0 * Eigen::Matrix3d::Identity(), -2.0 * a,
                                  Eigen::MatrixXd(0, 3), Eigen::VectorXd(0));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK((sol.x - a).norm() <= 1e-9);
}

TEST_CASE("single active bound with dual") {
  // min x^2 s.t. x >= 1; stationarity 2x - lambda = 0 at x* = 1.
  Eigen::MatrixXd p(1, 1), a(1, 1);
  p << 2.0;
  a << -1.0;  // -x <= -1
  const QpSolution sol = solve_qp(p, Eigen::VectorXd::Zero(1), a,
                                  Eigen::VectorXd::Constant(1, -1.0));
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.lambda[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("equality-constrained QP matches direct KKT solve") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6, m = 2;
    Eigen::MatrixXd root(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) root(i, j) = rng.uniform(-1.0, 1.0);
    QpProblem pr;
    pr.p = root.transpose() * root + Eigen::MatrixXd::Identity(n, n);
    pr.q.resize(n);
    for (int i = 0; i < n; ++i) pr.q[i] = rng.uniform(-1.0, 1.0);
    pr.a_eq.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) pr.a_eq(i, j) = rng.uniform(-1.0, 1.0);
    pr.b_eq = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    pr.a_in.resize(0, n);
    pr.b_in.resize(0);

    Eigen::MatrixXd kkt(n + m, n + m);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = pr.p;
    kkt.topRightCorner(n, m) = pr.a_eq.transpose();
    kkt.bottomLeftCorner(m, n) = pr.a_eq;
    Eigen::VectorXd rhs(n + m);
    rhs << -pr.q, pr.b_eq;
    const Eigen::VectorXd direct = kkt.partialPivLu().solve(rhs);

    const QpSolution sol = solve_qp(pr);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK((sol.x - direct.head(n)).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(qp_kkt_residual(pr, sol) <= 1e-6);
  }
}

TEST_CASE("random PSD 12-var QP with box constraints matches projected gradient") {
  Rng rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 12;
    Eigen::MatrixXd root(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) root(i, j) = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd p = root.transpose() * root + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      q[i] = rng.uniform(-2.0, 2.0);
      lo[i] = rng.uniform(-1.0, -0.1);
      hi[i] = rng.uniform(0.1, 1.0);
    }
    Eigen::MatrixXd a(2 * n, n);
    a << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(2 * n);
    b << hi, -lo;

    const QpSolution sol = solve_qp(p, q, a, b);
    REQUIRE(sol.status == QpStatus::Optimal);
    const Eigen::VectorXd ref = projected_gradient_box(p, q, lo, hi, 200000);
    const double f_as = 0.5 * sol.x.dot(p * sol.x) + q.dot(sol.x);
    const double f_pg = 0.5 * ref.dot(p * ref) + q.dot(ref);
    CHECK(f_as <= f_pg + 1e-6);
    CHECK(std::abs(f_as - f_pg) <= 1e-6);
  }
}

TEST_CASE("infeasible constraints are reported") {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;  // x <= -1 and -x <= -1
  const QpSolution sol = solve_qp(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1),
                                  a, Eigen::Vector2d(-1.0, -1.0));
  CHECK(sol.status == QpStatus::Infeasible);
}

TEST_CASE("duals are nonnegative and complementary") {
  Rng rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    Eigen::MatrixXd root(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) root(i, j) = rng.uniform(-1.0, 1.0);
    QpProblem pr;
    pr.p = root.transpose() * root + Eigen::MatrixXd::Identity(n, n);
    pr.q.resize(n);
    for (int i = 0; i < n; ++i) pr.q[i] = rng.uniform(-3.0, 3.0);
    pr.a_eq.resize(0, n);
    pr.b_eq.resize(0);
    pr.a_in.resize(n, n);
    pr.a_in.setIdentity();
    pr.b_in = Eigen::VectorXd::Constant(n, 0.2);
    const QpSolution sol = solve_qp(pr);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.lambda.minCoeff() >= 0.0);
    CHECK(qp_kkt_residual(pr, sol) <= 1e-7);
  }
}

}  // TEST_SUITE
