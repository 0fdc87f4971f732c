#include "graspkit/sampler.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "graspkit/errors.hpp"
#include "graspkit/rng.hpp"

namespace grasp::sampler {

SamplerConfig SamplerConfig::load_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("sampler config parse error: ") + e.what());
  }
  SamplerConfig c;
  c.standoff = j.value("standoff", c.standoff);
  c.kappa = j.value("kappa", c.kappa);
  c.top_height_threshold = j.value("top_height_threshold", c.top_height_threshold);
  c.preshape_clearance = j.value("preshape_clearance", c.preshape_clearance);
  if (c.standoff <= 0.0 || c.kappa <= 0.0)
    throw ConfigError("sampler config requires standoff > 0 and kappa > 0");
  return c;
}

SamplerConfig SamplerConfig::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sampler config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_json_text(text);
}

namespace {

// Fingertip spread along the palm y-axis with all finger joints swept
// together by t in [0, 1] between their limits, palm at identity.
double tip_separation(const kin::HandModel& hand, double t) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(hand.dof());
  for (int i = 6; i < hand.dof(); ++i)
    q[i] = hand.q_min()[i] + t * (hand.q_max()[i] - hand.q_min()[i]);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int f = 0; f < hand.num_fingers(); ++f) {
    const double y = hand.fingertip(q, f).y();
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return hi - lo;
}

// Bisect the curl parameter so the tip spread matches the target width;
// assumes spread shrinks as the fingers close, which holds for curling hands.
double preshape_parameter(const kin::HandModel& hand, double width) {
  double lo = 0.0, hi = 1.0;
  if (tip_separation(hand, 0.0) <= width) return 0.0;
  if (tip_separation(hand, 1.0) >= width) return 1.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tip_separation(hand, mid) > width ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Eigen::VectorXd sample_candidate(const kin::HandModel& hand,
                                 const geom::ObjectModel& object,
                                 const SamplerConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const geom::Obb obb = object.world_obb();

  // Vertical extent of the box decides whether only top approaches are kept.
  double height = 0.0;
  for (int i = 0; i < 3; ++i)
    height += 2.0 * std::abs(obb.axes.col(i).z()) * obb.half_extents[i];
  const bool top_only = height < config.top_height_threshold;

  // Palm y-axis: box axis with probability proportional to side length,
  // sign uniform. Palm x-axis: one of the remaining axes, toward the object.
  const double total = 2.0 * obb.half_extents.sum();
  int y_choice = 2;
  Eigen::Vector3d x_axis, y_axis;
  double width = 0.0, depth = 0.0;
  for (int tries = 0; tries < 64; ++tries) {
    const double u = rng.uniform(0.0, total);
    y_choice = u < 2.0 * obb.half_extents[0]
                   ? 0
                   : (u < 2.0 * (obb.half_extents[0] + obb.half_extents[1]) ? 1 : 2);
    const double y_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const int rem0 = (y_choice + 1) % 3, rem1 = (y_choice + 2) % 3;
    const int x_choice = rng.uniform() < 0.5 ? rem0 : rem1;
    const double x_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;

    y_axis = y_sign * obb.axes.col(y_choice);
    x_axis = x_sign * obb.axes.col(x_choice);
    width = 2.0 * obb.half_extents[y_choice];
    depth = obb.half_extents[x_choice];
    if (!top_only || x_axis.dot(-Eigen::Vector3d::UnitZ()) > 0.0) break;
    if (tries == 63) {
      // Rejection budget exhausted: take the steepest downward box axis.
      double best_z = 2.0;
      for (int i = 0; i < 3; ++i) {
        if (i == y_choice) continue;
        for (const double s : {-1.0, 1.0}) {
          const double z = s * obb.axes.col(i).z();
          if (z < best_z) {
            best_z = z;
            x_axis = s * obb.axes.col(i);
            depth = obb.half_extents[i];
          }
        }
      }
    }
  }

  // Orientation before noise; the standoff is measured along this axis.
  Eigen::Matrix3d r0;
  r0.col(0) = x_axis;
  r0.col(1) = (y_axis - y_axis.dot(x_axis) * x_axis).normalized();
  r0.col(2) = r0.col(0).cross(r0.col(1));
  const Eigen::Vector3d palm_pos =
      obb.center - (depth + config.standoff) * x_axis;

  // Von Mises rotational noise about a uniform axis.
  const Eigen::Vector3d noise_axis = rng.unit_vector3();
  const double noise_angle = rng.von_mises(config.kappa);
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(noise_angle, noise_axis).toRotationMatrix() * r0;

  Eigen::VectorXd q = Eigen::VectorXd::Zero(hand.dof());
  q.head<3>() = palm_pos;
  Eigen::AngleAxisd aa(r);
  q.segment<3>(3) = kin::wrap_rotation(aa.angle() * aa.axis());

  const double t = preshape_parameter(hand, width + config.preshape_clearance);
  for (int i = 6; i < hand.dof(); ++i)
    q[i] = hand.q_min()[i] + t * (hand.q_max()[i] - hand.q_min()[i]);

  return hand.clamp_to_limits(q);
}

}  // namespace grasp::sampler
