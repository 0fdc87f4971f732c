#include "graspkit/refine.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "graspkit/epsilon.hpp"
#include "graspkit/errors.hpp"
#include "graspkit/rng.hpp"

namespace grasp::refine {

const char* to_string(RefineStatus s) {
  switch (s) {
    case RefineStatus::Feasible: return "Feasible";
    case RefineStatus::MaxIter: return "MaxIter";
    case RefineStatus::Timeout: return "Timeout";
    case RefineStatus::SolverFailure: return "SolverFailure";
  }
  return "?";
}

std::pair<double, Eigen::VectorXd> surface_constraint(const kin::HandModel& hand,
                                                      const geom::ObjectModel& object,
                                                      const Eigen::VectorXd& q, int finger) {
  const Eigen::Vector3d p = hand.fingertip(q, finger);
  const Eigen::MatrixXd jac = hand.fingertip_jacobian(q, finger);
  const double value = object.value(p);
  const Eigen::VectorXd grad = jac.transpose() * object.gradient(p);
  return {value, grad};
}

std::pair<double, Eigen::VectorXd> collision_constraint(
    const kin::HandModel& hand, const geom::ObjectModel& object, double table_z,
    const kin::CollisionPair& pair, const Eigen::VectorXd& q, Eigen::Vector3d* last_dir) {
  const auto& spheres = hand.collision_spheres();
  const auto& sa = spheres[pair.sphere_a];
  const Eigen::Vector3d ca = hand.body_point(q, sa.body, sa.center);
  const Eigen::MatrixXd ja = hand.point_jacobian(q, sa.body, sa.center);

  switch (pair.type) {
    case kin::CollisionPair::Type::SphereSphere: {
      const auto& sb = spheres[pair.sphere_b];
      const Eigen::Vector3d cb = hand.body_point(q, sb.body, sb.center);
      const Eigen::MatrixXd jb = hand.point_jacobian(q, sb.body, sb.center);
      const Eigen::Vector3d diff = cb - ca;
      const double d = diff.norm();
      Eigen::Vector3d n_ab;
      if (d > 1e-9) {
        n_ab = diff / d;
        if (last_dir) *last_dir = n_ab;
      } else {
        // Coincident witness points: the direction is undefined, reuse the
        // previous one.
        n_ab = last_dir ? *last_dir : Eigen::Vector3d::UnitZ();
      }
      const double value = d - sa.radius - sb.radius;
      const Eigen::VectorXd grad = (jb - ja).transpose() * n_ab;
      return {value, grad};
    }
    case kin::CollisionPair::Type::SphereObject: {
      const double value = object.value(ca) - sa.radius;
      const Eigen::VectorXd grad = ja.transpose() * object.gradient(ca);
      return {value, grad};
    }
    case kin::CollisionPair::Type::SphereTable: {
      const double value = ca.z() - sa.radius - table_z;
      const Eigen::VectorXd grad = ja.row(2).transpose();
      return {value, grad};
    }
  }
  return {0.0, Eigen::VectorXd::Zero(hand.dof())};
}

WrenchJacobian build_wrench_jacobian(const kin::HandModel& hand,
                                     const geom::ObjectModel& object,
                                     const Eigen::VectorXd& q, double mu, int n_s,
                                     double torque_scale) {
  const int n_c = hand.num_fingers();
  const int n = hand.dof();
  const int m = n_c * n_s;
  const Eigen::Vector3d origin = object.origin();

  WrenchJacobian out;
  out.ws.w.resize(6, m);
  out.ws.provenance.reserve(m);
  out.ws.torque_scale = torque_scale;
  out.ws.torque_origin = origin;
  out.dwdq = Eigen::MatrixXd::Zero(6 * m, n);

  for (int i = 0; i < n_c; ++i) {
    const Eigen::Vector3d p = hand.fingertip(q, i);
    const Eigen::MatrixXd jac = hand.fingertip_jacobian(q, i);
    const Eigen::Vector3d g = object.gradient(p);
    const Eigen::Matrix3d hess = object.hessian(p);
    const double gn = g.norm();
    if (gn < 1e-8) throw DegenerateNormal("vanishing SDF gradient at fingertip");
    const Eigen::Vector3d ghat = g / gn;
    const Eigen::Vector3d n_hat = -ghat;

    Eigen::Vector3d ref = Eigen::Vector3d::UnitZ();
    if (std::abs(n_hat.dot(ref)) > 0.99) ref = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d u = ref.cross(n_hat);
    const double un = u.norm();
    const Eigen::Vector3d t1 = u / un;
    const Eigen::Vector3d t2 = n_hat.cross(t1);

    // Direction derivatives with respect to q, all 3 x n.
    const Eigen::Matrix3d proj_g = Eigen::Matrix3d::Identity() - ghat * ghat.transpose();
    const Eigen::MatrixXd dn = -(proj_g * hess * jac) / gn;
    const Eigen::MatrixXd du = kin::skew(ref) * dn;
    const Eigen::Matrix3d proj_t1 = Eigen::Matrix3d::Identity() - t1 * t1.transpose();
    const Eigen::MatrixXd dt1 = proj_t1 * du / un;
    const Eigen::MatrixXd dt2 = -kin::skew(t1) * dn + kin::skew(n_hat) * dt1;

    const Eigen::Vector3d arm = (p - origin) / torque_scale;
    for (int j = 0; j < n_s; ++j) {
      const double cj = std::cos(2.0 * M_PI * j / n_s);
      const double sj = std::sin(2.0 * M_PI * j / n_s);
      const Eigen::Vector3d v = n_hat + mu * (cj * t1 + sj * t2);
      const double vn = v.norm();
      const Eigen::Vector3d f = v / vn;
      const int col = i * n_s + j;
      out.ws.w.col(col) << f, arm.cross(f);
      out.ws.provenance.emplace_back(i, j);

      const Eigen::MatrixXd dv = dn + mu * (cj * dt1 + sj * dt2);
      const Eigen::MatrixXd df =
          (Eigen::Matrix3d::Identity() - f * f.transpose()) * dv / vn;
      const Eigen::MatrixXd dtorque =
          -kin::skew(f) * jac / torque_scale + kin::skew(arm) * df;
      for (int k = 0; k < n; ++k) {
        out.dwdq.block<3, 1>(6 * col, k) = df.col(k);
        out.dwdq.block<3, 1>(6 * col + 3, k) = dtorque.col(k);
      }
    }
  }
  out.ws.has_affine_rank7 = wrench::has_affine_rank7(out.ws.w);
  return out;
}

Evaluator::Evaluator(const RefinementProblem& pr, std::uint64_t seed) : pr_(pr) {
  rho_ = pr.torque_scale > 0.0 ? pr.torque_scale : pr.object.bounding_radius();
  pairs_ = kin::collision_pairs(pr.hand, pr.fingertip_object_margin, pr.safety_margin);
  Rng rng(derive_seed(seed, 0xC011));
  last_dirs_.resize(pairs_.size());
  for (auto& d : last_dirs_) d = rng.unit_vector3();
}

int Evaluator::num_eq() const { return pr_.hand.num_fingers(); }
int Evaluator::num_in() const { return 1 + static_cast<int>(pairs_.size()); }

sqp::NlpEval Evaluator::operator()(const Eigen::VectorXd& q) {
  const int n = pr_.hand.dof();
  const int n_c = pr_.hand.num_fingers();
  const int n_p = static_cast<int>(pairs_.size());
  sqp::NlpEval e;
  e.grad_f = Eigen::VectorXd::Zero(n);
  e.c_eq = Eigen::VectorXd::Zero(n_c);
  e.j_eq = Eigen::MatrixXd::Zero(n_c, n);
  e.c_in = Eigen::VectorXd::Zero(1 + n_p);
  e.j_in = Eigen::MatrixXd::Zero(1 + n_p, n);

  try {
    const WrenchJacobian wj =
        build_wrench_jacobian(pr_.hand, pr_.object, q, pr_.mu_optimizer, pr_.n_s, rho_);
    const metric::MinWeightSolution sol = metric::solve_min_weight(wj.ws);
    if (!sol.optimal()) throw NotEnoughWrenches("min-weight LP not optimal");
    const metric::MetricGradient grad = metric::grad_min_weight(wj.ws, wj.dwdq, sol);

    const int m = wj.ws.cols();
    e.f = -sol.l_star;
    e.grad_f = -grad.grad;
    e.c_in[0] = sol.l_bar - pr_.k_l;
    e.j_in.row(0) = (m * grad.grad).transpose();

    for (int i = 0; i < n_c; ++i) {
      const auto [value, g] = surface_constraint(pr_.hand, pr_.object, q, i);
      e.c_eq[i] = value;
      e.j_eq.row(i) = g.transpose();
    }
    for (int j = 0; j < n_p; ++j) {
      const auto [sigma, g] =
          collision_constraint(pr_.hand, pr_.object, pr_.table_z, pairs_[j], q,
                               &last_dirs_[j]);
      e.c_in[j + 1] = sigma - pairs_[j].margin;
      // Distant pairs keep their value but contribute no gradient.
      if (sigma <= pr_.cull_distance) e.j_in.row(j + 1) = g.transpose();
    }
  } catch (const std::exception&) {
    e.f = std::numeric_limits<double>::infinity();
  }
  return e;
}

sqp::NlpProblem assemble_nlp(const RefinementProblem& pr, Evaluator& evaluator) {
  sqp::NlpProblem nlp;
  nlp.n = pr.hand.dof();
  nlp.num_eq = evaluator.num_eq();
  nlp.num_in = evaluator.num_in();
  nlp.lower = pr.hand.q_min();
  nlp.upper = pr.hand.q_max();
  nlp.eval = [&evaluator](const Eigen::VectorXd& q) { return evaluator(q); };
  nlp.normalize = [](const Eigen::VectorXd& q) {
    Eigen::VectorXd out = q;
    out.segment<3>(3) = kin::wrap_rotation(q.segment<3>(3));
    return out;
  };
  return nlp;
}

bool check_feasible(const RefinementProblem& pr, const Eigen::VectorXd& q,
                    ConstraintResiduals* residuals, double* l_bar_out) {
  ConstraintResiduals r;
  r.joint = std::max(0.0, std::max((q - pr.hand.q_max()).maxCoeff(),
                               (pr.hand.q_min() - q).maxCoeff()));

  for (int i = 0; i < pr.hand.num_fingers(); ++i) {
    const Eigen::Vector3d p = pr.hand.fingertip(q, i);
    r.surface = std::max(r.surface, std::abs(pr.object.value(p)));
  }

  const auto pairs =
      kin::collision_pairs(pr.hand, pr.fingertip_object_margin, pr.safety_margin);
  const auto& spheres = pr.hand.collision_spheres();
  for (const auto& pair : pairs) {
    const auto& sa = spheres[pair.sphere_a];
    const Eigen::Vector3d ca = pr.hand.body_point(q, sa.body, sa.center);
    double sigma = 0.0;
    switch (pair.type) {
      case kin::CollisionPair::Type::SphereSphere: {
        const auto& sb = spheres[pair.sphere_b];
        const Eigen::Vector3d cb = pr.hand.body_point(q, sb.body, sb.center);
        sigma = (cb - ca).norm() - sa.radius - sb.radius;
        break;
      }
      case kin::CollisionPair::Type::SphereObject:
        sigma = pr.object.value(ca) - sa.radius;
        break;
      case kin::CollisionPair::Type::SphereTable:
        sigma = ca.z() - sa.radius - pr.table_z;
        break;
    }
    r.collision = std::max(r.collision, pair.margin - sigma);
  }
  r.collision = std::max(0.0, r.collision);

  double l_bar = -std::numeric_limits<double>::infinity();
  try {
    const double rho = pr.torque_scale > 0.0 ? pr.torque_scale : pr.object.bounding_radius();
    std::vector<wrench::ContactFrame> frames;
    for (int i = 0; i < pr.hand.num_fingers(); ++i) {
      frames.push_back(
          wrench::contact_frame(pr.object, pr.hand.fingertip(q, i)));
    }
    const wrench::WrenchSet ws =
        wrench::build_wrench_set(pr.object, frames, pr.mu_optimizer, pr.n_s, rho);
    const metric::MinWeightSolution sol = metric::solve_min_weight(ws);
    if (sol.optimal()) l_bar = sol.l_bar;
  } catch (const std::exception&) {
  }
  r.force_closure = std::max(0.0, pr.k_l - l_bar);
  if (l_bar_out) *l_bar_out = l_bar;
  if (residuals) *residuals = r;

  return r.joint <= pr.tol_joint && r.surface <= pr.tol_surface &&
         r.collision <= pr.tol_collision && r.force_closure <= pr.tol_force_closure;
}

RefinementResult solve_refinement(const RefinementProblem& pr, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  RefinementResult res;
  Evaluator evaluator(pr, seed);
  const sqp::NlpProblem nlp = assemble_nlp(pr, evaluator);

  sqp::SqpOptions opts;
  opts.max_iters = pr.max_iters;
  opts.time_cap_s = pr.time_cap_s;
  opts.constraint_tol = std::min({pr.tol_surface, pr.tol_collision, pr.tol_force_closure});
  const sqp::SqpResult sr = sqp::solve_sqp(nlp, pr.hand.clamp_to_limits(pr.q0), opts);

  res.q_star = sr.x;
  res.iterations = sr.iterations;
  double l_bar = 0.0;
  const bool feasible = check_feasible(pr, sr.x, &res.residuals, &l_bar);
  res.l_bar = l_bar;

  if (feasible) {
    res.status = RefineStatus::Feasible;
    try {
      const double rho =
          pr.torque_scale > 0.0 ? pr.torque_scale : pr.object.bounding_radius();
      const WrenchJacobian wj =
          build_wrench_jacobian(pr.hand, pr.object, sr.x, pr.mu_optimizer, pr.n_s, rho);
      const metric::MinWeightSolution sol = metric::solve_min_weight(wj.ws);
      res.epsilon = metric::epsilon_exact(wj.ws, sol.l_star).epsilon;
    } catch (const std::exception&) {
      res.epsilon = 0.0;
    }
  } else if (sr.status == sqp::SqpStatus::Timeout) {
    res.status = RefineStatus::Timeout;
  } else if (sr.status == sqp::SqpStatus::MaxIter) {
    res.status = RefineStatus::MaxIter;
  } else {
    res.status = RefineStatus::SolverFailure;
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

RefinementResult synthesize(const RefinementProblem& problem_template,
                            const sampler::SamplerConfig& sampler_config,
                            int max_attempts, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  RefinementResult last;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (elapsed() > problem_template.total_budget_s) {
      last.status = RefineStatus::Timeout;
      last.attempts = attempt;
      last.wall_time_s = elapsed();
      return last;
    }
    const std::uint64_t attempt_seed = derive_seed(seed, attempt);
    RefinementProblem pr = problem_template;
    pr.q0 = sampler::sample_candidate(pr.hand, pr.object, sampler_config, attempt_seed);
    pr.time_cap_s =
        std::min(pr.time_cap_s, std::max(0.1, pr.total_budget_s - elapsed()));
    last = solve_refinement(pr, attempt_seed);
    last.attempts = attempt + 1;
    if (last.status == RefineStatus::Feasible) break;
  }
  last.wall_time_s = elapsed();
  return last;
}

std::string result_to_json(const RefinementResult& r, bool include_wall_time) {
  char buf[160];
  std::string out = "{\"status\":\"";
  out += to_string(r.status);
  out += "\",\"q_star\":[";
  for (int i = 0; i < r.q_star.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.17g", i ? "," : "", r.q_star[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "],\"l_bar\":%.17g,\"epsilon\":%.17g,\"iters\":%d,\"attempts\":%d",
                r.l_bar, r.epsilon, r.iterations, r.attempts);
  out += buf;
  if (include_wall_time) {
    std::snprintf(buf, sizeof(buf), ",\"wall_time_s\":%.6f", r.wall_time_s);
    out += buf;
  }
  std::snprintf(
      buf, sizeof(buf),
      ",\"residuals\":{\"joint\":%.9g,\"surface\":%.9g,\"collision\":%.9g,"
      "\"force_closure\":%.9g}}",
      r.residuals.joint, r.residuals.surface, r.residuals.collision,
      r.residuals.force_closure);
  out += buf;
  return out;
}

}  // namespace grasp::refine
