#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "graspkit/hand.hpp"
#include "graspkit/sdf.hpp"

namespace grasp::sampler {

struct SamplerConfig {
  double standoff = 0.04;           // palm offset from the bounding box face
  double kappa = 10.0;              // von Mises concentration of rotation noise
  double top_height_threshold = 0.06;  // shorter objects get top grasps only
  double preshape_clearance = 0.01;    // extra fingertip separation vs box width

  static SamplerConfig load_json(const std::string& path);
  static SamplerConfig load_json_text(const std::string& text);
};

// Heuristic candidate grasp: aligns the palm y-axis with an oriented
// bounding-box axis chosen with probability proportional to side length,
// approaches along one of the remaining axes with von Mises rotational
// noise, stands the palm off the box face, and pre-shapes the fingers to the
// box width. The floating palm makes the final configuration assignment
// direct. Never fails; the result is usually infeasible and is meant as a
// refinement start.
Eigen::VectorXd sample_candidate(const kin::HandModel& hand,
                                 const geom::ObjectModel& object,
                                 const SamplerConfig& config, std::uint64_t seed);

}  // namespace grasp::sampler
