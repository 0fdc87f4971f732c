#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <vector>

#include "graspkit/min_weight.hpp"
#include "graspkit/wrench.hpp"

namespace grasp::metric {

// Radius of the largest origin-centered ball inscribed in the convex hull of
// the wrench-set columns; zero for non-force-closure sets.
struct EpsilonResult {
  double epsilon = 0.0;
  enum class Method { ExactFacet, Sampled } method = Method::ExactFacet;
  Eigen::VectorXd witness;  // unit direction achieving the minimum support
};

// Supporting-hyperplane enumeration over d-subsets of columns. Requires the
// origin strictly interior (pass the min-weight value); m is capped so the
// subset count stays tractable. Dimension-generic; wrench sets use d = 6.
EpsilonResult epsilon_exact_points(const Eigen::MatrixXd& points, bool origin_interior);
EpsilonResult epsilon_exact(const wrench::WrenchSet& ws, double l_star);

// Monte Carlo support minimum over sampled unit directions, clamped at zero.
// An upper bound on the exact value: sampling the minimum over a subset of
// directions can only overestimate it. Not a robustness certificate.
EpsilonResult epsilon_sampled_points(const Eigen::MatrixXd& points, int n_dirs,
                                     std::uint64_t seed);
EpsilonResult epsilon_sampled(const wrench::WrenchSet& ws, int n_dirs, std::uint64_t seed);

struct MetricPair {
  double l_bar = 0.0;
  double epsilon = 0.0;
};

struct CorrelationResult {
  double pearson_r = 0.0;
  double slope = 0.0;
  std::vector<MetricPair> pairs;  // force-closure grasps only
};

// Pearson correlation between the normalized min-weight value and the exact
// inscribed-ball radius over the force-closure members of `grasps`. Throws
// InsufficientSamples below 30 usable grasps.
CorrelationResult correlate_metrics(const std::vector<wrench::WrenchSet>& grasps);

// Correlation statistics for precomputed pairs (no sample-count gate).
CorrelationResult correlate_pairs(std::vector<MetricPair> pairs);

// CSV pairs: header "lbar,eps", one pair per line, 9 significant digits.
void write_pairs_csv(std::ostream& out, const std::vector<MetricPair>& pairs);

}  // namespace grasp::metric
