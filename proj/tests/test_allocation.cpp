#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "graspkit/allocation.hpp"
#include "graspkit/rng.hpp"
#include "graspkit/wrench.hpp"

using namespace grasp;
using namespace grasp::alloc;

namespace {

// Two antipodal contacts on a sphere of radius r centered at the origin.
std::vector<wrench::ContactFrame> antipodal_contacts(double r) {
  return {wrench::frame_from_normal({r, 0, 0}, {-1, 0, 0}),
          wrench::frame_from_normal({-r, 0, 0}, {1, 0, 0})};
}

}  // namespace

TEST_SUITE("allocation") {

TEST_CASE("pyramid halfspaces bracket the exact cone") {
  Rng rng(42);
  const double mu = 0.7;
  for (const int n_s : {4, 8}) {
    const Eigen::MatrixXd pyramid = pyramid_halfspaces(mu, n_s);
    REQUIRE(pyramid.rows() == n_s);

    // Inner disk: ||f_t|| <= mu cos(pi/n_s) f_n implies pyramid membership.
    const double mu_inner = mu * std::cos(M_PI / n_s);
    for (int i = 0; i < 500; ++i) {
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const double radial = rng.uniform(0.0, mu_inner);
      const Eigen::Vector3d f(radial * std::cos(angle), radial * std::sin(angle), 1.0);
      CHECK((pyramid * f).maxCoeff() <= 1e-12);
    }
    // Pyramid membership implies the exact cone.
    for (int i = 0; i < 500; ++i) {
      Eigen::VectorXd w(n_s);
      for (int j = 0; j < n_s; ++j) w[j] = rng.uniform(0.0, 1.0);
      Eigen::Vector3d f = Eigen::Vector3d::Zero();
      for (int j = 0; j < n_s; ++j) {
        const double th = 2.0 * M_PI * j / n_s;
        f += w[j] * Eigen::Vector3d(mu * std::cos(th), mu * std::sin(th), 1.0).normalized();
      }
      CHECK((pyramid * f).maxCoeff() <= 1e-12);
      CHECK(f.head<2>().norm() <= mu * f.z() + 1e-9);
    }
  }
}

TEST_CASE("minimum normal force scales with object mass") {
  CHECK(default_min_normal_force(0.5) == doctest::Approx(1.0));
  CHECK(default_min_normal_force(0.005) == doctest::Approx(0.25));
}

TEST_CASE("gravity resisted by an antipodal pair with symmetric normal forces") {
  const double r = 0.05, mass = 0.4, g = 9.81;
  const auto contacts = antipodal_contacts(r);
  AllocationProblem pr;
  pr.grasp_map = wrench::grasp_map(contacts, Eigen::Vector3d::Zero());
  pr.w_des << 0, 0, -mass * g, 0, 0, 0;  // gravity wrench on the object
  pr.mu = 0.7;
  pr.n_s = 4;
  pr.f_min_normal = 1.0;

  const AllocationResult res = allocate_forces(pr);
  REQUIRE(res.status == qp::QpStatus::Optimal);
  CHECK(res.residual <= 1e-6);

  // Equal normal components by symmetry.
  CHECK(std::abs(res.forces[2] - res.forces[5]) <= 1e-6);
  // World z-components sum to the object weight.
  double fz = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector3d local = res.forces.segment<3>(3 * i);
    fz += (contacts[i].rotation() * local).z();
  }
  CHECK(fz == doctest::Approx(mass * g).epsilon(1e-6));

  // Every contact force satisfies the pyramid and the exact cone.
  const Eigen::MatrixXd pyramid = pyramid_halfspaces(pr.mu, pr.n_s);
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector3d local = res.forces.segment<3>(3 * i);
    CHECK((pyramid * local).maxCoeff() <= 1e-6);
    CHECK(local.head<2>().norm() <= pr.mu * local.z() + 1e-6);
  }
}

TEST_CASE("zero wrench with zero floor returns zero forces") {
  const auto contacts = antipodal_contacts(0.05);
  AllocationProblem pr;
  pr.grasp_map = wrench::grasp_map(contacts, Eigen::Vector3d::Zero());
  pr.f_min_normal = 0.0;
  const AllocationResult res = allocate_forces(pr);
  REQUIRE(res.status == qp::QpStatus::Optimal);
  CHECK(res.forces.cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("zero wrench with unit floor gives minimal internal squeeze") {
  const auto contacts = antipodal_contacts(0.05);
  AllocationProblem pr;
  pr.grasp_map = wrench::grasp_map(contacts, Eigen::Vector3d::Zero());
  pr.f_min_normal = 1.0;
  const AllocationResult res = allocate_forces(pr);
  REQUIRE(res.status == qp::QpStatus::Optimal);
  CHECK(res.residual <= 1e-7);
  CHECK(res.forces[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.forces[5] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.forces.segment<2>(0).norm() <= 1e-6);
  CHECK(res.forces.segment<2>(3).norm() <= 1e-6);
}

TEST_CASE("conflicting torque limits are reported infeasible") {
  const auto contacts = antipodal_contacts(0.05);
  AllocationProblem pr;
  pr.grasp_map = wrench::grasp_map(contacts, Eigen::Vector3d::Zero());
  pr.f_min_normal = 1.0;
  pr.torque_map = Eigen::MatrixXd::Zero(1, 6);
  pr.torque_map(0, 2) = 1.0;  // torque proportional to the first normal force
  pr.tau_lb = Eigen::VectorXd::Constant(1, -0.1);
  pr.tau_ub = Eigen::VectorXd::Constant(1, 0.1);  // but F_min forces >= 1
  pr.tau_joint = Eigen::VectorXd::Zero(1);
  const AllocationResult res = allocate_forces(pr);
  CHECK(res.status == qp::QpStatus::Infeasible);
}

TEST_CASE("tripod gravity sanity") {
  std::vector<wrench::ContactFrame> contacts;
  for (int i = 0; i < 3; ++i) {
    const double th = 2.0 * M_PI * i / 3.0;
    const Eigen::Vector3d p(0.05 * std::cos(th), 0.05 * std::sin(th), 0.0);
    contacts.push_back(wrench::frame_from_normal(p, -p.normalized()));
  }
  const double mass = 0.2, g = 9.81;
  AllocationProblem pr;
  pr.grasp_map = wrench::grasp_map(contacts, Eigen::Vector3d::Zero());
  pr.w_des << 0, 0, -mass * g, 0, 0, 0;
  const AllocationResult res = allocate_forces(pr);
  REQUIRE(res.status == qp::QpStatus::Optimal);
  double fz = 0.0;
  for (int i = 0; i < 3; ++i)
    fz += (contacts[i].rotation() * res.forces.segment<3>(3 * i)).z();
  CHECK(fz == doctest::Approx(mass * g).epsilon(1e-6));
}

TEST_CASE("pose error wrench tabulated values") {
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

  // Exact rest: zero wrench.
  const Vector6d zero = pose_error_wrench({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3},
                                          Eigen::Vector3d::Zero(), eye, eye);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  // Pure yaw: torque along -z with magnitude k_r sin(theta).
  const double theta = 0.3;
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ())
                                 .toRotationMatrix();
  const Vector6d yaw = pose_error_wrench(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                         Eigen::Vector3d::Zero(), rz, eye);
  CHECK(yaw.head<3>().cwiseAbs().maxCoeff() == 0.0);
  CHECK(yaw[3] == doctest::Approx(0.0).scale(1));
  CHECK(yaw[4] == doctest::Approx(0.0).scale(1));
  CHECK(yaw[5] == doctest::Approx(-50.0 * std::sin(theta)).epsilon(1e-12));

  // Position offset: proportional force.
  const Vector6d push = pose_error_wrench({0.01, 0, 0}, {0, 0, 0},
                                          Eigen::Vector3d::Zero(), eye, eye);
  CHECK(push[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(push.tail<5>().cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
