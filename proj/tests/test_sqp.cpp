#include <doctest.h>

#include <Eigen/Dense>
#include <limits>

#include "graspkit/sqp.hpp"

using namespace grasp;
using namespace grasp::sqp;

namespace {

constexpr double kInf = 1e19;

NlpProblem make_problem(int n, int me, int mi,
                        std::function<NlpEval(const Eigen::VectorXd&)> eval) {
  NlpProblem nlp;
  nlp.n = n;
  nlp.num_eq = me;
  nlp.num_in = mi;
  nlp.lower = Eigen::VectorXd::Constant(n, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(n, kInf);
  nlp.eval = std::move(eval);
  return nlp;
}

}  // namespace

TEST_SUITE("sqp") {

TEST_CASE("equality-constrained quadratic solves to KKT exactness") {
  // min 1/2 x'Qx + c'x s.t. Ax = b, with known KKT solution.
  Eigen::Matrix3d qm;
  qm << 4, 1, 0, 1, 3, 0, 0, 0, 2;
  const Eigen::Vector3d c(-1.0, 2.0, 0.5);
  Eigen::MatrixXd a(1, 3);
  a << 1, 1, 1;
  const double b = 1.0;

  Eigen::Matrix4d kkt = Eigen::Matrix4d::Zero();
  kkt.topLeftCorner<3, 3>() = qm;
  kkt.topRightCorner<3, 1>() = a.transpose();
  kkt.bottomLeftCorner<1, 3>() = a;
  Eigen::Vector4d rhs;
  rhs << -c, b;
  const Eigen::Vector3d x_ref = kkt.partialPivLu().solve(rhs).head<3>();

  auto nlp = make_problem(3, 1, 0, [&](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = 0.5 * x.dot(qm * x) + c.dot(x);
    e.grad_f = qm * x + c;
    e.c_eq = Eigen::VectorXd::Constant(1, (a * x)(0) - b);
    e.j_eq = a;
    e.c_in.resize(0);
    e.j_in.resize(0, 3);
    return e;
  });
  const SqpResult res = solve_sqp(nlp, Eigen::Vector3d(5.0, -3.0, 0.0));
  CHECK(res.status == SqpStatus::Converged);
  CHECK((res.x - x_ref).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(res.iterations <= 5);
}

TEST_CASE("nonlinear equality: (1-x1)^2 with 10(x2 - x1^2) = 0") {
  auto nlp = make_problem(2, 1, 0, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = (1.0 - x[0]) * (1.0 - x[0]);
    e.grad_f = Eigen::Vector2d(-2.0 * (1.0 - x[0]), 0.0);
    e.c_eq = Eigen::VectorXd::Constant(1, 10.0 * (x[1] - x[0] * x[0]));
    e.j_eq.resize(1, 2);
    e.j_eq << -20.0 * x[0], 10.0;
    e.c_in.resize(0);
    e.j_in.resize(0, 2);
    return e;
  });
  const SqpResult res = solve_sqp(nlp, Eigen::Vector2d(-1.2, 1.0));
  CHECK(res.f <= 1e-8);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-4);
  CHECK(std::abs(res.x[1] - 1.0) <= 1e-4);
  CHECK(res.max_violation <= 1e-6);
}

TEST_CASE("mixed constraints match a fine grid search") {
  // min (x1-2)^2 + (x2-1)^2 s.t. x1 - 2 x2 + 1 = 0, x1^2/4 + x2^2 <= 1.
  auto nlp = make_problem(2, 1, 1, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = (x[0] - 2.0) * (x[0] - 2.0) + (x[1] - 1.0) * (x[1] - 1.0);
    e.grad_f = Eigen::Vector2d(2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0));
    e.c_eq = Eigen::VectorXd::Constant(1, x[0] - 2.0 * x[1] + 1.0);
    e.j_eq.resize(1, 2);
    e.j_eq << 1.0, -2.0;
    e.c_in = Eigen::VectorXd::Constant(1, 1.0 - x[0] * x[0] / 4.0 - x[1] * x[1]);
    e.j_in.resize(1, 2);
    e.j_in << -x[0] / 2.0, -2.0 * x[1];
    return e;
  });
  const SqpResult res = solve_sqp(nlp, Eigen::Vector2d(2.0, 2.0));
  CHECK(res.status == SqpStatus::Converged);

  // Grid-search the equality-parameterized line x1 = 2 x2 - 1.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000000; ++i) {
    const double x2 = -1.0 + 2.0 * i / 2000000.0;
    const double x1 = 2.0 * x2 - 1.0;
    if (x1 * x1 / 4.0 + x2 * x2 > 1.0) continue;
    best = std::min(best, (x1 - 2.0) * (x1 - 2.0) + (x2 - 1.0) * (x2 - 1.0));
  }
  CHECK(res.f == doctest::Approx(best).epsilon(1e-6));
  CHECK(res.max_violation <= 1e-7);
}

TEST_CASE("bound-constrained convex quadratic reaches the known optimum") {
  // min 9 - 8x1 - 6x2 - 4x3 + 2x1^2 + 2x2^2 + x3^2 + 2x1x2 + 2x1x3
  // s.t. x >= 0, x1 + x2 + 2x3 <= 3; optimal value 1/9.
  auto nlp = make_problem(3, 0, 1, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = 9.0 - 8.0 * x[0] - 6.0 * x[1] - 4.0 * x[2] + 2.0 * x[0] * x[0] +
          2.0 * x[1] * x[1] + x[2] * x[2] + 2.0 * x[0] * x[1] + 2.0 * x[0] * x[2];
    e.grad_f = Eigen::Vector3d(-8.0 + 4.0 * x[0] + 2.0 * x[1] + 2.0 * x[2],
                               -6.0 + 4.0 * x[1] + 2.0 * x[0],
                               -4.0 + 2.0 * x[2] + 2.0 * x[0]);
    e.c_eq.resize(0);
    e.j_eq.resize(0, 3);
    e.c_in = Eigen::VectorXd::Constant(1, 3.0 - x[0] - x[1] - 2.0 * x[2]);
    e.j_in.resize(1, 3);
    e.j_in << -1.0, -1.0, -2.0;
    return e;
  });
  nlp.lower = Eigen::Vector3d::Zero();
  const SqpResult res = solve_sqp(nlp, Eigen::Vector3d(0.5, 0.5, 0.5));
  CHECK(res.status == SqpStatus::Converged);
  CHECK(res.f == doctest::Approx(1.0 / 9.0).epsilon(1e-6));
}

TEST_CASE("rosenbrock constrained to the disc converges to (1,1)") {
  auto nlp = make_problem(2, 0, 1, [](const Eigen::VectorXd& x) {
    NlpEval e;
    const double a = x[1] - x[0] * x[0];
    e.f = 100.0 * a * a + (1.0 - x[0]) * (1.0 - x[0]);
    e.grad_f = Eigen::Vector2d(-400.0 * a * x[0] - 2.0 * (1.0 - x[0]), 200.0 * a);
    e.c_eq.resize(0);
    e.j_eq.resize(0, 2);
    e.c_in = Eigen::VectorXd::Constant(1, 2.0 - x[0] * x[0] - x[1] * x[1]);
    e.j_in.resize(1, 2);
    e.j_in << -2.0 * x[0], -2.0 * x[1];
    return e;
  });
  SqpOptions opts;
  opts.max_iters = 500;
  const SqpResult res = solve_sqp(nlp, Eigen::Vector2d(-1.0, 1.5), opts);
  CHECK(res.f <= 1e-7);
  CHECK((res.x - Eigen::Vector2d(1.0, 1.0)).norm() <= 1e-3);
}

TEST_CASE("infeasible linearization falls back to the elastic subproblem") {
  // Equalities x1 = 1 and x1 = -1 are inconsistent: the solver should not
  // crash and should report a violated result rather than claim convergence
  // at a feasible point.
  auto nlp = make_problem(1, 2, 0, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = x[0] * x[0];
    e.grad_f = Eigen::VectorXd::Constant(1, 2.0 * x[0]);
    e.c_eq = Eigen::Vector2d(x[0] - 1.0, x[0] + 1.0);
    e.j_eq.resize(2, 1);
    e.j_eq << 1.0, 1.0;
    e.c_in.resize(0);
    e.j_in.resize(0, 1);
    return e;
  });
  const SqpResult res = solve_sqp(nlp, Eigen::VectorXd::Constant(1, 3.0));
  CHECK(res.max_violation >= 0.5);
}

TEST_CASE("iterate normalization hook is applied") {
  auto nlp = make_problem(1, 0, 0, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = std::cos(x[0]);
    e.grad_f = Eigen::VectorXd::Constant(1, -std::sin(x[0]));
    e.c_eq.resize(0);
    e.j_eq.resize(0, 1);
    e.c_in.resize(0);
    e.j_in.resize(0, 1);
    return e;
  });
  nlp.normalize = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = x;
    out[0] = std::remainder(out[0], 2.0 * M_PI);
    return out;
  };
  const SqpResult res = solve_sqp(nlp, Eigen::VectorXd::Constant(1, 2.9));
  CHECK(std::abs(res.x[0]) <= M_PI + 1e-9);
  CHECK(res.f == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("iteration cap reports MaxIter") {
  auto nlp = make_problem(1, 0, 0, [](const Eigen::VectorXd& x) {
    NlpEval e;
    e.f = x[0] * x[0];
    e.grad_f = Eigen::VectorXd::Constant(1, 2.0 * x[0]);
    e.c_eq.resize(0);
    e.j_eq.resize(0, 1);
    e.c_in.resize(0);
    e.j_in.resize(0, 1);
    return e;
  });
  SqpOptions opts;
  opts.max_iters = 1;
  const SqpResult res = solve_sqp(nlp, Eigen::VectorXd::Constant(1, 100.0), opts);
  CHECK(res.status == SqpStatus::MaxIter);
}

}  // TEST_SUITE
