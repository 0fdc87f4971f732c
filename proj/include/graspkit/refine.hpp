#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "graspkit/hand.hpp"
#include "graspkit/min_weight.hpp"
#include "graspkit/sampler.hpp"
#include "graspkit/sdf.hpp"
#include "graspkit/sqp.hpp"
#include "graspkit/wrench.hpp"

namespace grasp::refine {

// Grasp refinement program over the hand configuration q:
//   max l*(q)   s.t.  joint limits, normalized metric above k_l,
//                     fingertips on the object surface, no collisions.
struct RefinementProblem {
  RefinementProblem(kin::HandModel hand_model, geom::ObjectModel object_model)
      : hand(std::move(hand_model)), object(std::move(object_model)) {}

  kin::HandModel hand;
  geom::ObjectModel object;
  double table_z = 0.0;  // table halfspace z >= table_z

  Eigen::VectorXd q0;
  double k_l = 0.3;
  double mu_optimizer = 0.5;  // conservative: must not exceed the object mu
  int n_s = 4;
  double torque_scale = 0.0;  // 0 = object bounding-sphere radius

  // Acceptance tolerances per constraint class.
  double tol_joint = 1e-2;
  double tol_surface = 5e-4;
  double tol_collision = 1e-3;
  double tol_force_closure = 1e-5;

  double fingertip_object_margin = -0.003;
  double safety_margin = 0.001;
  double cull_distance = 0.1;  // pairs farther than this get zero gradients

  int max_iters = 200;
  double time_cap_s = 10.0;
  double total_budget_s = 60.0;
};

enum class RefineStatus { Feasible, MaxIter, Timeout, SolverFailure };

const char* to_string(RefineStatus s);

struct ConstraintResiduals {
  double joint = 0.0;          // limit violation
  double surface = 0.0;        // max |s(FK_i)|
  double collision = 0.0;      // max margin shortfall
  double force_closure = 0.0;  // max(0, k_l - l_bar)
};

struct RefinementResult {
  Eigen::VectorXd q_star;
  double l_bar = 0.0;
  double epsilon = 0.0;
  RefineStatus status = RefineStatus::SolverFailure;
  int iterations = 0;
  int attempts = 1;
  double wall_time_s = 0.0;
  ConstraintResiduals residuals;
};

// Fingertip-on-surface equality: value s(FK_i(q)), gradient J_i' grad s.
std::pair<double, Eigen::VectorXd> surface_constraint(const kin::HandModel& hand,
                                                      const geom::ObjectModel& object,
                                                      const Eigen::VectorXd& q, int finger);

// Signed distance of one collision pair with its witness-direction gradient.
// `last_dir` carries the previous separation direction for the coincident
// case and is updated in place.
std::pair<double, Eigen::VectorXd> collision_constraint(
    const kin::HandModel& hand, const geom::ObjectModel& object, double table_z,
    const kin::CollisionPair& pair, const Eigen::VectorXd& q, Eigen::Vector3d* last_dir);

// Wrench matrix plus its configuration Jacobian, chained through forward
// kinematics and the surface normal derivative (SDF Hessian).
struct WrenchJacobian {
  wrench::WrenchSet ws;
  Eigen::MatrixXd dwdq;  // 6m x n, column k = vec(dW/dq_k)
};
WrenchJacobian build_wrench_jacobian(const kin::HandModel& hand,
                                     const geom::ObjectModel& object,
                                     const Eigen::VectorXd& q, double mu, int n_s,
                                     double torque_scale);

// NLP assembly. The evaluator owns the collision-pair state; one instance
// serves one solve.
class Evaluator {
 public:
  explicit Evaluator(const RefinementProblem& problem, std::uint64_t seed);

  sqp::NlpEval operator()(const Eigen::VectorXd& q);
  const std::vector<kin::CollisionPair>& pairs() const { return pairs_; }
  int num_eq() const;
  int num_in() const;

 private:
  const RefinementProblem& pr_;
  double rho_;
  std::vector<kin::CollisionPair> pairs_;
  std::vector<Eigen::Vector3d> last_dirs_;
};

sqp::NlpProblem assemble_nlp(const RefinementProblem& problem, Evaluator& evaluator);

// Fresh full evaluation of every constraint class at q (independent of any
// solver state). Returns true when all residuals pass their tolerances.
bool check_feasible(const RefinementProblem& problem, const Eigen::VectorXd& q,
                    ConstraintResiduals* residuals, double* l_bar_out = nullptr);

RefinementResult solve_refinement(const RefinementProblem& problem, std::uint64_t seed);

// Sample-and-refine loop: per-attempt seeds are derived from `seed` by the
// counter scheme, so serial and parallel schedules agree. Returns the first
// feasible result (with its attempt index) or the last failure once the
// attempt or time budget is exhausted.
RefinementResult synthesize(const RefinementProblem& problem_template,
                            const sampler::SamplerConfig& sampler_config,
                            int max_attempts, std::uint64_t seed);

std::string result_to_json(const RefinementResult& result, bool include_wall_time);

}  // namespace grasp::refine
