#include "graspkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "graspkit/errors.hpp"
#include "graspkit/rng.hpp"

namespace grasp::geom {

namespace {

struct VertexKey {
  std::uint64_t x, y, z;
  bool operator==(const VertexKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t v : {k.x, k.y, k.z}) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

VertexKey key_of(const Eigen::Vector3d& v) {
  VertexKey k;
  std::memcpy(&k.x, &v.x(), 8);
  std::memcpy(&k.y, &v.y(), 8);
  std::memcpy(&k.z, &v.z(), 8);
  return k;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Eigen::Vector3d closest_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                    const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Moller-Trumbore. Returns t > 0 on hit, negative otherwise.
double ray_triangle(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                    const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                    const Eigen::Vector3d& c) {
  const Eigen::Vector3d e1 = b - a, e2 = c - a;
  const Eigen::Vector3d h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return -1.0;
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = o - a;
  const double u = s.dot(h) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Eigen::Vector3d q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  return e2.dot(q) * inv;
}

double box_distance_sq(const Eigen::Vector3d& p, const Eigen::Vector3d& lo,
                       const Eigen::Vector3d& hi) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double v = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
    d += v * v;
  }
  return d;
}

bool ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& inv_d,
             const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double t0 = (lo[i] - o[i]) * inv_d[i];
    double t1 = (hi[i] - o[i]) * inv_d[i];
    if (inv_d[i] < 0.0) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmax < tmin) return false;
  }
  return true;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Eigen::Vector3d> vertices,
                           std::vector<Eigen::Vector3i> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  if (faces_.empty()) throw NonWatertightMesh("mesh has no faces");
  check_watertight();
  if (signed_volume() < 0.0) {
    for (auto& f : faces_) std::swap(f[1], f[2]);
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& f : faces_) {
    total += (vertices_[f[0]] - vertices_[f[1]]).norm();
    total += (vertices_[f[1]] - vertices_[f[2]]).norm();
    total += (vertices_[f[2]] - vertices_[f[0]]).norm();
    count += 3;
  }
  mean_edge_length_ = total / static_cast<double>(count);

  vertex_faces_.resize(vertices_.size());
  for (std::size_t t = 0; t < faces_.size(); ++t)
    for (int v = 0; v < 3; ++v) vertex_faces_[faces_[t][v]].push_back(static_cast<int>(t));

  build_bvh();
}

void TriangleMesh::check_watertight() {
  // Every undirected edge must be shared by exactly two faces with opposite
  // direction (consistent orientation).
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(faces_.size() * 3);
  const auto edge_key = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  for (const auto& f : faces_) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      if (a == b) throw NonWatertightMesh("degenerate face edge");
      if (++directed[edge_key(a, b)] > 1)
        throw NonWatertightMesh("duplicate directed edge (inconsistent orientation)");
    }
  }
  for (const auto& [k, n] : directed) {
    const int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
    if (directed.find(edge_key(b, a)) == directed.end())
      throw NonWatertightMesh("open edge (not watertight)");
  }
}

double TriangleMesh::signed_volume() const {
  double v = 0.0;
  for (const auto& f : faces_)
    v += vertices_[f[0]].dot(vertices_[f[1]].cross(vertices_[f[2]]));
  return v / 6.0;
}

void TriangleMesh::build_bvh() {
  const int n = static_cast<int>(faces_.size());
  tri_order_.resize(n);
  std::iota(tri_order_.begin(), tri_order_.end(), 0);
  std::vector<Eigen::Vector3d> centroids(n);
  for (int i = 0; i < n; ++i) {
    const auto& f = faces_[i];
    centroids[i] = (vertices_[f[0]] + vertices_[f[1]] + vertices_[f[2]]) / 3.0;
  }
  nodes_.clear();
  nodes_.reserve(2 * n);

  // Iterative median split on the longest centroid axis, leaves of <= 4 tris.
  struct Item { int node, begin, end; };
  nodes_.push_back({});
  std::vector<Item> stack{{0, 0, n}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    Node& node = nodes_[it.node];
    node.begin = it.begin;
    node.end = it.end;
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (int i = it.begin; i < it.end; ++i) {
      const auto& f = faces_[tri_order_[i]];
      for (int v = 0; v < 3; ++v) {
        lo = lo.cwiseMin(vertices_[f[v]]);
        hi = hi.cwiseMax(vertices_[f[v]]);
      }
    }
    node.lo = lo;
    node.hi = hi;
    if (it.end - it.begin <= 4) {
      node.left = node.right = -1;
      continue;
    }
    Eigen::Vector3d clo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d chi = -clo;
    for (int i = it.begin; i < it.end; ++i) {
      clo = clo.cwiseMin(centroids[tri_order_[i]]);
      chi = chi.cwiseMax(centroids[tri_order_[i]]);
    }
    int axis;
    (chi - clo).maxCoeff(&axis);
    const int mid = (it.begin + it.end) / 2;
    std::nth_element(tri_order_.begin() + it.begin, tri_order_.begin() + mid,
                     tri_order_.begin() + it.end, [&](int a, int b) {
                       return centroids[a][axis] < centroids[b][axis];
                     });
    const int node_idx = it.node;
    const int left = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[node_idx].left = left;
    nodes_[node_idx].right = left + 1;
    stack.push_back({left, it.begin, mid});
    stack.push_back({left + 1, mid, it.end});
  }
}

TriangleMesh::ClosestPoint TriangleMesh::closest_point(const Eigen::Vector3d& p) const {
  ClosestPoint best;
  double best_sq = std::numeric_limits<double>::infinity();
  struct Item { int node; double dist_sq; };
  std::vector<Item> stack{{0, box_distance_sq(p, nodes_[0].lo, nodes_[0].hi)}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.dist_sq >= best_sq) continue;
    const Node& node = nodes_[it.node];
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int tri = tri_order_[i];
        const auto& f = faces_[tri];
        const Eigen::Vector3d q =
            closest_on_triangle(p, vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]);
        const double d_sq = (q - p).squaredNorm();
        if (d_sq < best_sq) {
          best_sq = d_sq;
          best.point = q;
          best.triangle = tri;
        }
      }
      continue;
    }
    const double dl = box_distance_sq(p, nodes_[node.left].lo, nodes_[node.left].hi);
    const double dr = box_distance_sq(p, nodes_[node.right].lo, nodes_[node.right].hi);
    // Push farther child first so nearer child is explored first.
    if (dl < dr) {
      if (dr < best_sq) stack.push_back({node.right, dr});
      if (dl < best_sq) stack.push_back({node.left, dl});
    } else {
      if (dl < best_sq) stack.push_back({node.left, dl});
      if (dr < best_sq) stack.push_back({node.right, dr});
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

int TriangleMesh::count_ray_crossings(const Eigen::Vector3d& origin,
                                      const Eigen::Vector3d& dir) const {
  const Eigen::Vector3d inv_d = dir.cwiseInverse();
  int crossings = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int ni = stack.back();
    stack.pop_back();
    const Node& node = nodes_[ni];
    if (!ray_box(origin, inv_d, node.lo, node.hi)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const auto& f = faces_[tri_order_[i]];
        const double t =
            ray_triangle(origin, dir, vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]);
        if (t > 1e-12) ++crossings;
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  return crossings;
}

bool TriangleMesh::is_inside(const Eigen::Vector3d& p) const {
  // Fixed non-axis-aligned directions; majority vote tolerates edge grazing.
  static const Eigen::Vector3d dirs[3] = {
      Eigen::Vector3d(0.57735026918962576, 0.57735026918962576, 0.57735026918962576),
      Eigen::Vector3d(-0.28108463771482023, 0.89208279982204916, -0.35355339059327373).normalized(),
      Eigen::Vector3d(0.12403473458920845, -0.49613893835683387, 0.85935069202948283).normalized()};
  int inside_votes = 0;
  for (const auto& d : dirs)
    if (count_ray_crossings(p, d) % 2 == 1) ++inside_votes;
  return inside_votes >= 2;
}

Eigen::Vector3d TriangleMesh::face_normal(int triangle) const {
  const auto& f = faces_[triangle];
  const Eigen::Vector3d n =
      (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
  const double len = n.norm();
  if (len < 1e-18) throw DegenerateNormal("zero-area face");
  return n / len;
}

Eigen::Vector3d TriangleMesh::surface_normal(const Eigen::Vector3d& p, int triangle) const {
  const auto& f = faces_[triangle];
  const Eigen::Vector3d &a = vertices_[f[0]], &b = vertices_[f[1]], &c = vertices_[f[2]];

  // Barycentric classification of the feature the point lies on.
  const Eigen::Vector3d v0 = b - a, v1 = c - a, v2 = p - a;
  const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const double d20 = v2.dot(v0), d21 = v2.dot(v1);
  const double denom = d00 * d11 - d01 * d01;
  const double v = (d11 * d20 - d01 * d21) / denom;
  const double w = (d00 * d21 - d01 * d20) / denom;
  const double u = 1.0 - v - w;
  const double tol = 1e-9;

  int vertex = -1;
  if (u > 1.0 - tol) vertex = f[0];
  else if (v > 1.0 - tol) vertex = f[1];
  else if (w > 1.0 - tol) vertex = f[2];
  if (vertex >= 0) {
    // Angle-weighted pseudonormal over the vertex's face fan.
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    for (const int t : vertex_faces_[vertex]) {
      const auto& ft = faces_[t];
      int k = 0;
      while (ft[k] != vertex) ++k;
      const Eigen::Vector3d e1 =
          (vertices_[ft[(k + 1) % 3]] - vertices_[vertex]).normalized();
      const Eigen::Vector3d e2 =
          (vertices_[ft[(k + 2) % 3]] - vertices_[vertex]).normalized();
      const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
      n += angle * face_normal(t);
    }
    return n.normalized();
  }

  int edge_v0 = -1, edge_v1 = -1;
  if (u < tol) { edge_v0 = f[1]; edge_v1 = f[2]; }
  else if (v < tol) { edge_v0 = f[0]; edge_v1 = f[2]; }
  else if (w < tol) { edge_v0 = f[0]; edge_v1 = f[1]; }
  if (edge_v0 >= 0) {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    for (const int t : vertex_faces_[edge_v0]) {
      const auto& ft = faces_[t];
      if (ft[0] == edge_v1 || ft[1] == edge_v1 || ft[2] == edge_v1) n += face_normal(t);
    }
    return n.normalized();
  }
  return face_normal(triangle);
}

std::vector<Eigen::Vector3d> TriangleMesh::sample_surface(int count,
                                                          std::uint64_t seed) const {
  std::vector<double> cdf(faces_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const auto& f = faces_[i];
    total += 0.5 * (vertices_[f[1]] - vertices_[f[0]])
                       .cross(vertices_[f[2]] - vertices_[f[0]])
                       .norm();
    cdf[i] = total;
  }
  Rng rng(seed);
  std::vector<Eigen::Vector3d> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double r = rng.uniform(0.0, total);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), r);
    const auto& f = faces_[std::distance(cdf.begin(), it)];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    out.push_back(vertices_[f[0]] + u * (vertices_[f[1]] - vertices_[f[0]]) +
                  v * (vertices_[f[2]] - vertices_[f[0]]));
  }
  return out;
}

namespace {

std::vector<Eigen::Vector3d> weld(const std::vector<Eigen::Vector3d>& raw,
                                  std::vector<int>* remap) {
  std::unordered_map<VertexKey, int, VertexKeyHash> seen;
  std::vector<Eigen::Vector3d> out;
  remap->resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const VertexKey k = key_of(raw[i]);
    const auto [it, inserted] = seen.try_emplace(k, static_cast<int>(out.size()));
    if (inserted) out.push_back(raw[i]);
    (*remap)[i] = it->second;
  }
  return out;
}

}  // namespace

TriangleMesh TriangleMesh::load(const std::string& path) {
  const auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == "obj") return load_obj(path);
  if (ext == "stl") return load_stl(path);
  throw ConfigError("unsupported mesh format: " + path);
}

TriangleMesh TriangleMesh::load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Eigen::Vector3d v;
      ss >> v.x() >> v.y() >> v.z();
      verts.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        const auto slash = tok.find('/');
        int i = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
        if (i < 0) i = static_cast<int>(verts.size()) + i + 1;
        idx.push_back(i - 1);
      }
      for (std::size_t t = 2; t < idx.size(); ++t)
        faces.emplace_back(idx[0], idx[t - 1], idx[t]);
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh TriangleMesh::load_stl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  std::vector<Eigen::Vector3d> raw;

  bool binary = false;
  if (data.size() >= 84) {
    std::uint32_t n;
    std::memcpy(&n, data.data() + 80, 4);
    if (data.size() == 84 + static_cast<std::size_t>(n) * 50) binary = true;
  }
  if (binary) {
    std::uint32_t n;
    std::memcpy(&n, data.data() + 80, 4);
    raw.reserve(3 * n);
    for (std::uint32_t t = 0; t < n; ++t) {
      const char* rec = data.data() + 84 + t * 50;
      for (int v = 0; v < 3; ++v) {
        float xyz[3];
        std::memcpy(xyz, rec + 12 + v * 12, 12);
        raw.emplace_back(xyz[0], xyz[1], xyz[2]);
      }
    }
  } else {
    std::istringstream ss(std::string(data.begin(), data.end()));
    std::string tok;
    while (ss >> tok) {
      if (tok == "vertex") {
        Eigen::Vector3d v;
        ss >> v.x() >> v.y() >> v.z();
        raw.push_back(v);
      }
    }
  }
  if (raw.size() % 3 != 0 || raw.empty()) throw ConfigError("malformed STL: " + path);

  std::vector<int> remap;
  std::vector<Eigen::Vector3d> verts = weld(raw, &remap);
  std::vector<Eigen::Vector3i> faces;
  faces.reserve(raw.size() / 3);
  for (std::size_t t = 0; t < raw.size(); t += 3)
    faces.emplace_back(remap[t], remap[t + 1], remap[t + 2]);
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh make_icosphere(double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  // Orient so +-x are vertices at every subdivision level.
  const Eigen::Vector3d pivot = verts[1];
  const Eigen::Matrix3d align =
      Eigen::Quaterniond::FromTwoVectors(pivot, Eigen::Vector3d::UnitX())
          .toRotationMatrix();
  for (auto& v : verts) v = align * v;
  std::vector<Eigen::Vector3i> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::unordered_map<std::uint64_t, int> midpoint;
    const auto mid = [&](int a, int b) {
      const std::uint64_t k =
          (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
      const auto it = midpoint.find(k);
      if (it != midpoint.end()) return it->second;
      verts.push_back(((verts[a] + verts[b]) / 2.0).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(k, idx);
      return idx;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (auto& v : verts) v *= radius;
  return TriangleMesh(std::move(verts), std::move(faces));
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file: " + path);
  out.precision(17);
  for (const auto& v : mesh.vertices())
    out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& f : mesh.faces())
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
}

}  // namespace grasp::geom
