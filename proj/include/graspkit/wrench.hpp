#pragma once

#include <Eigen/Dense>
#include <vector>

#include "graspkit/sdf.hpp"

namespace grasp::wrench {

// Contact frame on an object surface: inward unit normal plus a deterministic
// orthonormal tangent pair, all in world coordinates.
struct ContactFrame {
  Eigen::Vector3d position;
  Eigen::Vector3d normal;    // inward (into the object)
  Eigen::Vector3d tangent1;
  Eigen::Vector3d tangent2;

  // Columns map contact-local (t1, t2, n) force coordinates to world.
  Eigen::Matrix3d rotation() const {
    Eigen::Matrix3d r;
    r.col(0) = tangent1;
    r.col(1) = tangent2;
    r.col(2) = normal;
    return r;
  }
};

struct FrictionCone {
  double mu = 0.0;
  int sides = 0;
  Eigen::Matrix3Xd edges;  // unit columns, world frame
};

struct WrenchSet {
  Eigen::Matrix<double, 6, Eigen::Dynamic> w;
  std::vector<std::pair<int, int>> provenance;  // (contact, edge) per column
  double torque_scale = 1.0;
  Eigen::Vector3d torque_origin = Eigen::Vector3d::Zero();
  bool has_affine_rank7 = false;  // a 7-subset of affinely independent columns exists

  int cols() const { return static_cast<int>(w.cols()); }
};

// Frame at a near-surface point; normal is the negated SDF gradient. The
// tangent pair is built from a fixed reference axis so frames do not flip
// between calls. Throws DegenerateNormal on a vanishing gradient.
ContactFrame contact_frame(const geom::ObjectModel& object, const Eigen::Vector3d& p);

ContactFrame frame_from_normal(const Eigen::Vector3d& position,
                               const Eigen::Vector3d& inward_normal);

// n_s unit edges rotationally equispaced on the cone boundary about the
// inward normal, half-angle atan(mu).
FrictionCone cone_edges(const ContactFrame& frame, double mu, int n_s);

WrenchSet build_wrench_set(const geom::ObjectModel& object,
                           const std::vector<ContactFrame>& contacts, double mu, int n_s,
                           double torque_scale);

// Same construction with an explicit torque origin, for tests and synthetic
// wrench sets.
WrenchSet build_wrench_set_at(const std::vector<ContactFrame>& contacts, double mu,
                              int n_s, double torque_scale,
                              const Eigen::Vector3d& torque_origin);

// Grasp map G: stacked contact-local forces (t1, t2, n) per contact to a
// world wrench about `origin`. Unscaled torque (physical units).
Eigen::Matrix<double, 6, Eigen::Dynamic> grasp_map(const std::vector<ContactFrame>& contacts,
                                                   const Eigen::Vector3d& origin);

bool has_affine_rank7(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w);

}  // namespace grasp::wrench
