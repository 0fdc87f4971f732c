#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <string>
#include <vector>

namespace grasp::kin {

struct Joint {
  enum class Type { Revolute, Prismatic };
  Type type = Type::Revolute;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // parent frame
  Eigen::Vector3d origin = Eigen::Vector3d::Zero(); // offset from parent frame
  double limit_lo = -M_PI;
  double limit_hi = M_PI;
};

struct CollisionSphere {
  int body = 0;  // 0 = palm, links numbered breadth over fingers
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // body frame
  double radius = 0.0;
  bool fingertip = false;
};

struct Finger {
  std::vector<Joint> joints;
  Eigen::Vector3d tip_offset = Eigen::Vector3d::Zero();  // contact point, last link frame
};

// Floating-palm multi-finger hand. Configuration layout:
//   q[0..2] palm position, q[3..5] palm rotation (exponential coordinates),
//   then finger joints in declaration order.
class HandModel {
 public:
  static HandModel load_json(const std::string& path);
  static HandModel load_json_text(const std::string& text);

  int dof() const { return 6 + joint_count_; }
  int num_fingers() const { return static_cast<int>(fingers_.size()); }
  int num_bodies() const { return 1 + joint_count_; }
  const std::vector<Finger>& fingers() const { return fingers_; }
  const std::vector<CollisionSphere>& collision_spheres() const { return spheres_; }
  const Eigen::VectorXd& q_min() const { return q_min_; }
  const Eigen::VectorXd& q_max() const { return q_max_; }
  const std::string& name() const { return name_; }

  int finger_joint_offset(int finger) const;            // into q
  int body_index(int finger, int link) const;           // palm = 0
  int parent_body(int body) const;                      // -1 for palm
  int tip_body(int finger) const;

  std::vector<Eigen::Isometry3d> body_poses(const Eigen::VectorXd& q) const;

  // World position of the prescribed fingertip contact point.
  Eigen::Vector3d fingertip(const Eigen::VectorXd& q, int finger) const;

  Eigen::Vector3d body_point(const Eigen::VectorXd& q, int body,
                             const Eigen::Vector3d& local) const;

  // 3 x dof Jacobian of a point rigidly attached to `body`. Columns of joints
  // on other fingers are identically zero.
  Eigen::MatrixXd point_jacobian(const Eigen::VectorXd& q, int body,
                                 const Eigen::Vector3d& local) const;

  Eigen::MatrixXd fingertip_jacobian(const Eigen::VectorXd& q, int finger) const;

  Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& q) const;

 private:
  std::string name_;
  std::vector<Finger> fingers_;
  std::vector<CollisionSphere> spheres_;
  Eigen::VectorXd q_min_, q_max_;
  int joint_count_ = 0;
  std::vector<int> finger_offsets_;  // joint offset per finger
};

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega);
Eigen::Matrix3d skew(const Eigen::Vector3d& v);
// Partial of exp(omega) with respect to omega_i, applied as dR * v.
Eigen::Matrix3d dexp_so3(const Eigen::Vector3d& omega, int i);
// Rewraps exponential coordinates to norm <= pi (same rotation).
Eigen::Vector3d wrap_rotation(const Eigen::Vector3d& omega);

// Collision pair list for one hand + one object + a table halfspace.
struct CollisionPair {
  enum class Type { SphereSphere, SphereObject, SphereTable };
  Type type = Type::SphereSphere;
  int sphere_a = -1;
  int sphere_b = -1;   // SphereSphere only
  double margin = 0.0; // required clearance d_j (negative allows penetration)
};

// Sphere-sphere pairs between non-adjacent bodies, every sphere against the
// object, and every sphere against the table. Fingertip/object pairs get the
// interpenetration allowance; all other pairs the safety margin.
std::vector<CollisionPair> collision_pairs(const HandModel& hand,
                                           double fingertip_object_margin = -0.003,
                                           double safety_margin = 0.001);

}  // namespace grasp::kin
