#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace grasp::geom {

// Watertight triangle mesh with an AABB tree for closest-point and ray
// queries. Vertices are welded on load; faces are re-oriented so the total
// signed volume is positive.
class TriangleMesh {
 public:
  TriangleMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Eigen::Vector3i> faces);

  static TriangleMesh load(const std::string& path);  // .obj or .stl by extension
  static TriangleMesh load_obj(const std::string& path);
  static TriangleMesh load_stl(const std::string& path);

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<Eigen::Vector3i>& faces() const { return faces_; }
  double mean_edge_length() const { return mean_edge_length_; }
  double signed_volume() const;

  struct ClosestPoint {
    Eigen::Vector3d point;
    int triangle = -1;
    double distance = 0.0;  // unsigned
  };
  ClosestPoint closest_point(const Eigen::Vector3d& p) const;

  // Signed distance: parity of ray crossings along 3 fixed directions,
  // majority vote. Negative inside.
  bool is_inside(const Eigen::Vector3d& p) const;

  Eigen::Vector3d face_normal(int triangle) const;

  // Outward normal at a surface point: the face normal in a face interior,
  // and the angle-weighted pseudonormal on edges and at vertices.
  Eigen::Vector3d surface_normal(const Eigen::Vector3d& on_surface, int triangle) const;

  // Uniform area-weighted surface samples, deterministic for a fixed seed.
  std::vector<Eigen::Vector3d> sample_surface(int count, std::uint64_t seed) const;

 private:
  struct Node {
    Eigen::Vector3d lo, hi;
    int left = -1, right = -1;  // children, or leaf triangle range
    int begin = 0, end = 0;
  };

  void build_bvh();
  void check_watertight();
  int count_ray_crossings(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const;

  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Eigen::Vector3i> faces_;
  std::vector<Node> nodes_;
  std::vector<int> tri_order_;
  std::vector<std::vector<int>> vertex_faces_;
  double mean_edge_length_ = 0.0;
};

// Procedural icosphere, for tests and demos.
TriangleMesh make_icosphere(double radius, int subdivisions);

void write_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace grasp::geom
