#include "graspkit/epsilon.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "graspkit/errors.hpp"
#include "graspkit/rng.hpp"
#include "graspkit/support_kernels.hpp"

namespace grasp::metric {

EpsilonResult epsilon_exact_points(const Eigen::MatrixXd& points, bool origin_interior) {
  const int d = static_cast<int>(points.rows());
  const int m = static_cast<int>(points.cols());
  EpsilonResult res;
  res.method = EpsilonResult::Method::ExactFacet;
  res.witness = Eigen::VectorXd::Zero(d);
  if (!origin_interior) return res;
  if (m > 24) throw TooManyWrenches("facet enumeration capped at 24 columns");

  const double scale = std::max(1.0, points.cwiseAbs().maxCoeff());
  const double side_tol = 1e-9 * scale;
  double best = std::numeric_limits<double>::infinity();

  // For every d-subset spanning a hyperplane, test whether all remaining
  // points lie on one side; ties on the plane count as members of the facet.
  std::vector<int> subset(d);
  Eigen::MatrixXd diffs(d - 1, d);
  std::function<void(int, int)> recurse = [&](int start, int depth) {
    if (depth == d) {
      for (int i = 1; i < d; ++i)
        diffs.row(i - 1) = (points.col(subset[i]) - points.col(subset[0])).transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
      lu.setThreshold(1e-9);
      if (lu.rank() != d - 1) return;  // affinely dependent subset
      Eigen::VectorXd normal = lu.kernel().col(0);
      normal.normalize();
      double offset = normal.dot(points.col(subset[0]));

      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int jj = 0; jj < m; ++jj) {
        const double s = normal.dot(points.col(jj)) - offset;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      if (lo < -side_tol && hi > side_tol) return;  // points on both sides
      if (hi > side_tol) {  // flip so every point satisfies normal'x <= offset
        normal = -normal;
        offset = -offset;
      }
      if (offset <= 0.0) return;  // cannot support a hull containing the origin
      if (offset < best) {
        best = offset;
        res.witness = normal;
      }
      return;
    }
    for (int jj = start; jj <= m - (d - depth); ++jj) {
      subset[depth] = jj;
      recurse(jj + 1, depth + 1);
    }
  };
  recurse(0, 0);

  if (std::isfinite(best)) res.epsilon = best;
  return res;
}

EpsilonResult epsilon_exact(const wrench::WrenchSet& ws, double l_star) {
  return epsilon_exact_points(ws.w, l_star > 0.0);
}

EpsilonResult epsilon_sampled_points(const Eigen::MatrixXd& points, int n_dirs,
                                     std::uint64_t seed) {
  const int d = static_cast<int>(points.rows());
  EpsilonResult res;
  res.method = EpsilonResult::Method::Sampled;
  res.witness = Eigen::VectorXd::Zero(d);

  Rng rng(seed);
  const kernels::SupportMinFn kernel = kernels::active_support_min();
  constexpr int kChunk = 4096;
  Eigen::MatrixXd dirs(d, kChunk);
  double best = std::numeric_limits<double>::infinity();
  int remaining = n_dirs;
  while (remaining > 0) {
    const int count = std::min(remaining, kChunk);
    for (int j = 0; j < count; ++j) dirs.col(j) = rng.unit_vector(d);
    const kernels::SupportMin sm =
        kernel(points.data(), d, static_cast<int>(points.cols()), dirs.data(), count);
    if (sm.value < best) {
      best = sm.value;
      res.witness = dirs.col(sm.dir_index);
    }
    remaining -= count;
  }
  res.epsilon = std::max(0.0, best);
  return res;
}

EpsilonResult epsilon_sampled(const wrench::WrenchSet& ws, int n_dirs, std::uint64_t seed) {
  return epsilon_sampled_points(ws.w, n_dirs, seed);
}

CorrelationResult correlate_metrics(const std::vector<wrench::WrenchSet>& grasps) {
  std::vector<MetricPair> pairs;
  for (const auto& ws : grasps) {
    const MinWeightSolution sol = solve_min_weight(ws);
    if (!sol.optimal() || sol.l_star <= 0.0) continue;
    const EpsilonResult eps = epsilon_exact(ws, sol.l_star);
    pairs.push_back({sol.l_bar, eps.epsilon});
  }
  if (pairs.size() < 30)
    throw InsufficientSamples("need at least 30 force-closure grasps, got " +
                              std::to_string(pairs.size()));
  return correlate_pairs(std::move(pairs));
}

CorrelationResult correlate_pairs(std::vector<MetricPair> pairs) {
  CorrelationResult out;
  out.pairs = std::move(pairs);
  const int n = static_cast<int>(out.pairs.size());
  if (n == 0) return out;

  double sx = 0, sy = 0;
  for (const auto& p : out.pairs) {
    sx += p.l_bar;
    sy += p.epsilon;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : out.pairs) {
    sxx += (p.l_bar - mx) * (p.l_bar - mx);
    syy += (p.epsilon - my) * (p.epsilon - my);
    sxy += (p.l_bar - mx) * (p.epsilon - my);
  }
  out.pearson_r = sxy / std::sqrt(std::max(sxx * syy, 1e-300));
  out.slope = sxy / std::max(sxx, 1e-300);
  return out;
}

void write_pairs_csv(std::ostream& out, const std::vector<MetricPair>& pairs) {
  out << "lbar,eps\n";
  char buf[80];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.l_bar, p.epsilon);
    out << buf;
  }
}

}  // namespace grasp::metric
