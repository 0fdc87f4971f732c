#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <memory>
#include <string>

#include "graspkit/mesh.hpp"

namespace grasp::geom {

struct Obb {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // columns, orthonormal
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();
};

// Signed distance shape in its local frame. Gradients are unit vectors
// (distance fields are eikonal); values are negative inside.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual double value(const Eigen::Vector3d& p) const = 0;
  virtual Eigen::Vector3d gradient(const Eigen::Vector3d& p) const = 0;
  virtual Eigen::Matrix3d hessian(const Eigen::Vector3d& p, double delta) const = 0;
  virtual Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const = 0;
  virtual double bounding_radius() const = 0;
  virtual Obb local_obb() const = 0;
  virtual double default_hessian_delta() const { return 1e-5; }
};

std::shared_ptr<Shape> make_sphere(double radius);
std::shared_ptr<Shape> make_box(const Eigen::Vector3d& half_extents);
std::shared_ptr<Shape> make_cylinder(double radius, double half_length);  // axis z
// Inside-outside exponents e1 (z blending), e2 (xy blending), both in (0, 2].
// Closest points are found by a damped Newton solve on the projection
// conditions, so values stay true Euclidean distances.
std::shared_ptr<Shape> make_superellipsoid(const Eigen::Vector3d& half_extents,
                                           double e1, double e2);
std::shared_ptr<Shape> make_mesh_shape(TriangleMesh mesh, std::uint64_t hessian_seed = 17);

struct SdfQuery {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
  Eigen::Vector3d closest_point = Eigen::Vector3d::Zero();
};

// A posed object with mass and friction. All queries take and return
// world-frame quantities.
class ObjectModel {
 public:
  ObjectModel(std::shared_ptr<Shape> shape, const Eigen::Isometry3d& pose, double mass_kg,
              double mu);

  double value(const Eigen::Vector3d& p_world) const;
  Eigen::Vector3d gradient(const Eigen::Vector3d& p_world) const;
  Eigen::Matrix3d hessian(const Eigen::Vector3d& p_world, double delta) const;
  Eigen::Matrix3d hessian(const Eigen::Vector3d& p_world) const;  // default delta
  Eigen::Vector3d closest_point(const Eigen::Vector3d& p_world) const;
  SdfQuery query(const Eigen::Vector3d& p_world) const;

  Obb world_obb() const;
  const Eigen::Isometry3d& pose() const { return pose_; }
  Eigen::Vector3d origin() const { return pose_.translation(); }
  double mass() const { return mass_; }
  double mu() const { return mu_; }
  // Max distance from the object-frame origin to the surface; used as the
  // torque scale so force and torque rows are commensurate.
  double bounding_radius() const { return bounding_radius_; }
  const Shape& shape() const { return *shape_; }
  double default_hessian_delta() const { return shape_->default_hessian_delta(); }

 private:
  std::shared_ptr<Shape> shape_;
  Eigen::Isometry3d pose_;
  double mass_;
  double mu_;
  double bounding_radius_;
  Obb local_obb_;
};

// Object config: {"geometry": {...}, "pose": {"position": [...],
// "quat_wxyz": [...]}, "mass_kg": ..., "mu": ...}. Mesh paths are resolved
// relative to the config file.
ObjectModel load_object_json(const std::string& path);
ObjectModel load_object_json_text(const std::string& text, const std::string& base_dir);

}  // namespace grasp::geom
