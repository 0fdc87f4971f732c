#pragma once

#include <Eigen/Dense>
#include <string>

#include "graspkit/hand.hpp"
#include "graspkit/rng.hpp"
#include "graspkit/sdf.hpp"
#include "graspkit/wrench.hpp"

#ifndef GRASPKIT_CONFIG_DIR
#define GRASPKIT_CONFIG_DIR "configs"
#endif

namespace grasp::test {

inline std::string config_path(const std::string& rel) {
  return std::string(GRASPKIT_CONFIG_DIR) + "/" + rel;
}

inline kin::HandModel hand_3f() { return kin::HandModel::load_json(config_path("hand_3f.json")); }
inline kin::HandModel hand_4f() { return kin::HandModel::load_json(config_path("hand_4f.json")); }
inline geom::ObjectModel sphere_object() {
  return geom::load_object_json(config_path("objects/sphere_5cm.json"));
}
inline geom::ObjectModel box_object() {
  return geom::load_object_json(config_path("objects/box.json"));
}
inline geom::ObjectModel cylinder_object() {
  return geom::load_object_json(config_path("objects/cylinder.json"));
}

inline wrench::WrenchSet wrench_set_from_matrix(const Eigen::MatrixXd& w) {
  wrench::WrenchSet ws;
  ws.w = w;
  for (int i = 0; i < w.cols(); ++i) ws.provenance.emplace_back(i, 0);
  ws.has_affine_rank7 = wrench::has_affine_rank7(ws.w);
  return ws;
}

// Cross-polytope wrench set: columns +-e_1 .. +-e_6.
inline wrench::WrenchSet cross_polytope() {
  Eigen::MatrixXd w(6, 12);
  for (int i = 0; i < 6; ++i) {
    w.col(2 * i) = Eigen::VectorXd::Unit(6, i);
    w.col(2 * i + 1) = -Eigen::VectorXd::Unit(6, i);
  }
  return wrench_set_from_matrix(w);
}

// Point sets with known origin-containment status, built constructively so
// no hull library is needed for ground truth.
//
// Interior: d random points plus one balancing point so the origin is a
// strictly positive convex combination of an affinely independent (d+1)-set.
inline Eigen::MatrixXd points_origin_interior(int dim, int m, Rng& rng) {
  for (;;) {
    Eigen::MatrixXd pts(dim, m);
    Eigen::VectorXd weights(dim + 1);
    for (int i = 0; i <= dim; ++i) weights[i] = rng.uniform(0.2, 1.0);
    weights /= weights.sum();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) {
      for (int r = 0; r < dim; ++r) pts(r, i) = rng.uniform(-1.0, 1.0);
      acc += weights[i] * pts.col(i);
    }
    pts.col(dim) = -acc / weights[dim];
    for (int i = dim + 1; i < m; ++i)
      for (int r = 0; r < dim; ++r) pts(r, i) = rng.uniform(-1.0, 1.0);

    Eigen::MatrixXd lifted(dim + 1, dim + 1);
    lifted.topRows(dim) = pts.leftCols(dim + 1);
    lifted.row(dim).setOnes();
    if (std::abs(lifted.determinant()) > 1e-6) return pts;
  }
}

// Exterior: every point has first coordinate >= 0.1, so x_1 = 0.05 separates.
inline Eigen::MatrixXd points_origin_exterior(int dim, int m, Rng& rng) {
  Eigen::MatrixXd pts(dim, m);
  for (int i = 0; i < m; ++i) {
    pts(0, i) = rng.uniform(0.1, 1.0);
    for (int r = 1; r < dim; ++r) pts(r, i) = rng.uniform(-1.0, 1.0);
  }
  return pts;
}

// Boundary: the origin is a positive combination of d points inside the
// hyperplane x_1 = 0 while every other point has x_1 > 0, so x_1 = 0
// supports the hull at the origin.
inline Eigen::MatrixXd points_origin_boundary(int dim, int m, Rng& rng) {
  Eigen::MatrixXd pts(dim, m);
  Eigen::VectorXd weights(dim);
  for (int i = 0; i < dim; ++i) weights[i] = rng.uniform(0.2, 1.0);
  weights /= weights.sum();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim - 1);
  for (int i = 0; i < dim - 1; ++i) {
    pts(0, i) = 0.0;
    for (int r = 1; r < dim; ++r) pts(r, i) = rng.uniform(-1.0, 1.0);
    acc += weights[i] * pts.col(i).tail(dim - 1);
  }
  pts(0, dim - 1) = 0.0;
  pts.col(dim - 1).tail(dim - 1) = -acc / weights[dim - 1];
  for (int i = dim; i < m; ++i) {
    pts(0, i) = rng.uniform(0.1, 1.0);
    for (int r = 1; r < dim; ++r) pts(r, i) = rng.uniform(-1.0, 1.0);
  }
  return pts;
}

}  // namespace grasp::test
