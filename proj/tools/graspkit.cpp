// Batch command-line interface: synthesize grasps, run the metric
// correlation study, and audit analytic gradients against finite
// differences. All commands are deterministic for a fixed seed; outputs
// carry a manifest hash of their inputs.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "graspkit/allocation.hpp"
#include "graspkit/epsilon.hpp"
#include "graspkit/errors.hpp"
#include "graspkit/manifest.hpp"
#include "graspkit/refine.hpp"
#include "graspkit/rng.hpp"
#include "graspkit/sampler.hpp"
#include "graspkit/support_kernels.hpp"

namespace fs = std::filesystem;
using namespace grasp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInsufficient = 3;
constexpr int kExitAudit = 4;

struct CommonArgs {
  std::string object_path;
  std::string hand_path;
  std::string sampler_path;
  int n = 20;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  double budget_s = 60.0;
  double k_l = 0.3;
  double mu_opt = 0.5;
  int n_s = 4;
  int attempts = 10;
  int jobs = 0;
};

refine::RefinementProblem make_problem(const CommonArgs& args,
                                       const geom::ObjectModel& object,
                                       const kin::HandModel& hand) {
  refine::RefinementProblem pr(hand, object);
  pr.q0 = Eigen::VectorXd::Zero(hand.dof());
  pr.k_l = args.k_l;
  pr.mu_optimizer = args.mu_opt;
  pr.n_s = args.n_s;
  pr.total_budget_s = args.budget_s;
  return pr;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double quartile(std::vector<double> v, double f) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = f * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

// Deterministic parallel map: worker threads pull indices, results land in
// order-indexed slots.
std::vector<refine::RefinementResult> run_batch(const refine::RefinementProblem& tmpl,
                                                const sampler::SamplerConfig& sc,
                                                int count, int attempts,
                                                std::uint64_t seed, int jobs) {
  std::vector<refine::RefinementResult> results(count);
  std::atomic<int> next{0};
  const int threads =
      jobs > 0 ? jobs : std::max(1u, std::thread::hardware_concurrency());
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      results[i] = refine::synthesize(tmpl, sc, attempts, derive_seed(seed, i));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

int cmd_synthesize(const CommonArgs& args) {
  const geom::ObjectModel object = geom::load_object_json(args.object_path);
  const kin::HandModel hand = kin::HandModel::load_json(args.hand_path);
  const sampler::SamplerConfig sc = args.sampler_path.empty()
                                        ? sampler::SamplerConfig{}
                                        : sampler::SamplerConfig::load_json(args.sampler_path);

  cli::RunManifest manifest;
  manifest.command = "synthesize";
  manifest.seed = args.seed;
  manifest.add_file("object", args.object_path);
  manifest.add_file("hand", args.hand_path);
  if (!args.sampler_path.empty()) manifest.add_file("sampler", args.sampler_path);

  const refine::RefinementProblem tmpl = make_problem(args, object, hand);
  const auto results = run_batch(tmpl, sc, args.n, args.attempts, args.seed, args.jobs);

  fs::create_directories(args.out_dir);
  std::ofstream jsonl(fs::path(args.out_dir) / "results.jsonl");
  for (const auto& r : results) jsonl << refine::result_to_json(r, true) << "\n";

  std::vector<double> lbars, epsilons, times, attempt_counts;
  int feasible = 0;
  for (const auto& r : results) {
    if (r.status == refine::RefineStatus::Feasible) {
      ++feasible;
      lbars.push_back(r.l_bar);
      epsilons.push_back(r.epsilon);
      attempt_counts.push_back(r.attempts);
    }
    times.push_back(r.wall_time_s);
  }

  std::ofstream summary(fs::path(args.out_dir) / "summary.json");
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\"n\":%d,\"feasible\":%d,\"success_rate\":%.6f,"
                "\"l_bar\":{\"median\":%.9g,\"q1\":%.9g,\"q3\":%.9g},"
                "\"epsilon\":{\"median\":%.9g,\"q1\":%.9g,\"q3\":%.9g},"
                "\"attempts\":{\"median\":%.9g,\"q1\":%.9g,\"q3\":%.9g},"
                "\"wall_time_s\":{\"median\":%.6f,\"q1\":%.6f,\"q3\":%.6f},",
                args.n, feasible, args.n ? double(feasible) / args.n : 0.0,
                median(lbars), quartile(lbars, 0.25), quartile(lbars, 0.75),
                median(epsilons), quartile(epsilons, 0.25), quartile(epsilons, 0.75),
                median(attempt_counts), quartile(attempt_counts, 0.25),
                quartile(attempt_counts, 0.75), median(times), quartile(times, 0.25),
                quartile(times, 0.75));
  summary << buf << "\"manifest\":" << manifest.to_json() << "}\n";

  std::printf("synthesize: %d/%d feasible, median l_bar %.4f, median eps %.5f, "
              "median time %.3fs\n",
              feasible, args.n, median(lbars), median(epsilons), median(times));
  if (args.n > 0 && feasible == 0) return kExitInsufficient;
  return kExitOk;
}

int cmd_correlate(const std::vector<std::string>& object_paths, const CommonArgs& args) {
  if (object_paths.size() < 2) {
    std::cerr << "correlate needs at least 2 objects\n";
    return kExitConfig;
  }
  const kin::HandModel hand = kin::HandModel::load_json(args.hand_path);
  const sampler::SamplerConfig sc = args.sampler_path.empty()
                                        ? sampler::SamplerConfig{}
                                        : sampler::SamplerConfig::load_json(args.sampler_path);

  cli::RunManifest manifest;
  manifest.command = "correlate";
  manifest.seed = args.seed;
  manifest.add_file("hand", args.hand_path);
  for (std::size_t i = 0; i < object_paths.size(); ++i)
    manifest.add_file("object" + std::to_string(i), object_paths[i]);

  std::vector<wrench::WrenchSet> sets;
  for (std::size_t oi = 0; oi < object_paths.size(); ++oi) {
    const geom::ObjectModel object = geom::load_object_json(object_paths[oi]);
    const refine::RefinementProblem tmpl = make_problem(args, object, hand);
    const auto results = run_batch(tmpl, sc, args.n, args.attempts,
                                   derive_seed(args.seed, 1000 + oi), args.jobs);
    const double rho = object.bounding_radius();
    for (const auto& r : results) {
      if (r.status != refine::RefineStatus::Feasible) continue;
      std::vector<wrench::ContactFrame> frames;
      try {
        for (int f = 0; f < hand.num_fingers(); ++f)
          frames.push_back(wrench::contact_frame(object, hand.fingertip(r.q_star, f)));
        sets.push_back(
            wrench::build_wrench_set(object, frames, args.mu_opt, args.n_s, rho));
      } catch (const std::exception&) {
      }
    }
  }

  try {
    const metric::CorrelationResult corr = metric::correlate_metrics(sets);
    fs::create_directories(args.out_dir);
    std::ofstream csv(fs::path(args.out_dir) / "pairs.csv");
    metric::write_pairs_csv(csv, corr.pairs);
    std::ofstream summary(fs::path(args.out_dir) / "correlation.json");
    char buf[160];
    std::snprintf(buf, sizeof(buf), "{\"pearson_r\":%.9g,\"slope\":%.9g,\"pairs\":%zu,",
                  corr.pearson_r, corr.slope, corr.pairs.size());
    summary << buf << "\"manifest\":" << manifest.to_json() << "}\n";
    std::printf("correlate: %zu force-closure grasps, pearson r = %.4f, slope = %.4f\n",
                corr.pairs.size(), corr.pearson_r, corr.slope);
  } catch (const InsufficientSamples& e) {
    std::cerr << "correlate: " << e.what() << "\n";
    return kExitInsufficient;
  }
  return kExitOk;
}

int cmd_audit(const CommonArgs& args, int n_checks, double threshold_scale) {
  const geom::ObjectModel object = geom::load_object_json(args.object_path);
  const kin::HandModel hand = kin::HandModel::load_json(args.hand_path);
  const sampler::SamplerConfig sc;

  struct ClassReport {
    const char* name;
    double max_rel_err = 0.0;
    double threshold = 0.0;
    int checked = 0;
    int skipped = 0;
    bool pass() const { return max_rel_err <= threshold; }
  };
  ClassReport rep_metric{"grad_min_weight", 0.0, 1e-3 * threshold_scale, 0, 0};
  ClassReport rep_surface{"surface", 0.0, 1e-4 * threshold_scale, 0, 0};
  ClassReport rep_collision{"collision", 0.0, 1e-4 * threshold_scale, 0, 0};
  ClassReport rep_hessian{"sdf_hessian", 0.0, 1e-3 * threshold_scale, 0, 0};

  refine::RefinementProblem pr = make_problem(args, object, hand);
  const double rho = object.bounding_radius();
  const double h = 1e-6;
  double metric_eval_ms = 0.0;
  int metric_evals = 0;

  for (int check = 0; check < n_checks; ++check) {
    const std::uint64_t cs = derive_seed(args.seed, check);
    Eigen::VectorXd q = sampler::sample_candidate(hand, object, sc, cs);
    Rng rng(derive_seed(cs, 7));
    for (int i = 0; i < q.size(); ++i)
      q[i] += rng.uniform(-0.05, 0.05);
    q = hand.clamp_to_limits(q);

    // Metric gradient vs central differences through the whole chain.
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const refine::WrenchJacobian wj =
          refine::build_wrench_jacobian(hand, object, q, args.mu_opt, args.n_s, rho);
      const metric::MinWeightSolution sol = metric::solve_min_weight(wj.ws);
      const metric::MetricGradient g = metric::grad_min_weight(wj.ws, wj.dwdq, sol);
      metric_eval_ms +=
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
      ++metric_evals;
      if (!sol.degenerate) {
        Eigen::VectorXd fd(q.size());
        bool fd_ok = true;
        for (int i = 0; i < q.size() && fd_ok; ++i) {
          Eigen::VectorXd qp = q, qm = q;
          qp[i] += h;
          qm[i] -= h;
          const auto wp = refine::build_wrench_jacobian(hand, object, qp, args.mu_opt,
                                                        args.n_s, rho);
          const auto wm = refine::build_wrench_jacobian(hand, object, qm, args.mu_opt,
                                                        args.n_s, rho);
          const auto sp = metric::solve_min_weight(wp.ws);
          const auto sm = metric::solve_min_weight(wm.ws);
          if (sp.degenerate || sm.degenerate) fd_ok = false;
          fd[i] = (sp.l_star - sm.l_star) / (2.0 * h);
        }
        if (fd_ok) {
          const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
          rep_metric.max_rel_err = std::max(
              rep_metric.max_rel_err, (g.grad - fd).cwiseAbs().maxCoeff() / scale);
          ++rep_metric.checked;
        } else {
          ++rep_metric.skipped;
        }
      } else {
        ++rep_metric.skipped;
      }
    } catch (const std::exception&) {
      ++rep_metric.skipped;
    }

    // Surface constraint gradients.
    for (int f = 0; f < hand.num_fingers(); ++f) {
      const auto [v0, g0] = refine::surface_constraint(hand, object, q, f);
      Eigen::VectorXd fd(q.size());
      for (int i = 0; i < q.size(); ++i) {
        Eigen::VectorXd qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        fd[i] = (refine::surface_constraint(hand, object, qp, f).first -
                 refine::surface_constraint(hand, object, qm, f).first) /
                (2.0 * h);
      }
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      rep_surface.max_rel_err =
          std::max(rep_surface.max_rel_err, (g0 - fd).cwiseAbs().maxCoeff() / scale);
      ++rep_surface.checked;
    }

    // Collision constraint gradients, skipping near-singular separations.
    const auto pairs = kin::collision_pairs(hand);
    Rng pair_rng(derive_seed(cs, 11));
    for (int rep = 0; rep < 3; ++rep) {
      const int pi = pair_rng.uniform_int(0, static_cast<int>(pairs.size()) - 1);
      Eigen::Vector3d dir = pair_rng.unit_vector3();
      const auto [v0, g0] =
          refine::collision_constraint(hand, object, pr.table_z, pairs[pi], q, &dir);
      if (std::abs(v0) < 1e-4) {
        ++rep_collision.skipped;
        continue;
      }
      Eigen::VectorXd fd(q.size());
      for (int i = 0; i < q.size(); ++i) {
        Eigen::VectorXd qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        Eigen::Vector3d d1 = dir, d2 = dir;
        fd[i] = (refine::collision_constraint(hand, object, pr.table_z, pairs[pi], qp, &d1)
                     .first -
                 refine::collision_constraint(hand, object, pr.table_z, pairs[pi], qm, &d2)
                     .first) /
                (2.0 * h);
      }
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      rep_collision.max_rel_err =
          std::max(rep_collision.max_rel_err, (g0 - fd).cwiseAbs().maxCoeff() / scale);
      ++rep_collision.checked;
    }

    // SDF Hessian vs finite differences of the gradient.
    {
      Rng point_rng(derive_seed(cs, 13));
      const Eigen::Vector3d p =
          object.origin() + object.bounding_radius() * 1.5 * point_rng.unit_vector3();
      const Eigen::Matrix3d hess = object.hessian(p);
      Eigen::Matrix3d fd;
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d e = h * Eigen::Vector3d::Unit(i);
        fd.col(i) = (object.gradient(p + e) - object.gradient(p - e)) / (2.0 * h);
      }
      fd = 0.5 * (fd + fd.transpose());
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      rep_hessian.max_rel_err =
          std::max(rep_hessian.max_rel_err, (hess - fd).cwiseAbs().maxCoeff() / scale);
      ++rep_hessian.checked;
    }
  }

  bool all_pass = true;
  for (const auto* rep : {&rep_metric, &rep_surface, &rep_collision, &rep_hessian}) {
    std::printf("audit %-16s %s  max_rel_err %.3e  threshold %.3e  (checked %d, skipped %d)\n",
                rep->name, rep->pass() ? "PASS" : "FAIL", rep->max_rel_err, rep->threshold,
                rep->checked, rep->skipped);
    all_pass = all_pass && rep->pass();
  }
  if (metric_evals > 0)
    std::printf("audit timing: l*+grad evaluation %.3f ms mean over %d evals (kernel %s)\n",
                metric_eval_ms / metric_evals, metric_evals,
                kernels::active_support_min_name());
  return all_pass ? kExitOk : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grasp synthesis toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<std::string> objects;
  int n_checks = 10;
  double threshold_scale = 1.0;

  auto add_common = [&](CLI::App* cmd, bool need_object) {
    if (need_object)
      cmd->add_option("--object", args.object_path, "object config JSON")->required();
    cmd->add_option("--hand", args.hand_path, "hand config JSON")->required();
    cmd->add_option("--sampler", args.sampler_path, "sampler config JSON");
    cmd->add_option("-n", args.n, "number of grasps");
    cmd->add_option("--seed", args.seed, "base seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--budget-s", args.budget_s, "per-grasp time budget (s)");
    cmd->add_option("--kl", args.k_l, "normalized metric lower bound");
    cmd->add_option("--mu-opt", args.mu_opt, "optimizer friction coefficient");
    cmd->add_option("--ns", args.n_s, "friction pyramid sides");
    cmd->add_option("--attempts", args.attempts, "max sampler attempts per grasp");
    cmd->add_option("--jobs", args.jobs, "worker threads (0 = hardware)");
  };

  CLI::App* synth = app.add_subcommand("synthesize", "sample and refine grasps");
  add_common(synth, true);

  CLI::App* corr = app.add_subcommand("correlate", "metric correlation study");
  corr->add_option("--object", objects, "object config JSON (repeat)")->required();
  add_common(corr, false);

  CLI::App* audit = app.add_subcommand("audit", "gradient and Hessian audit");
  add_common(audit, true);
  audit->add_option("--checks", n_checks, "random configurations per class");
  audit->add_option("--threshold", threshold_scale, "threshold scale factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitConfig : kExitOk;
  }

  try {
    if (synth->parsed()) return cmd_synthesize(args);
    if (corr->parsed()) return cmd_correlate(objects, args);
    if (audit->parsed()) return cmd_audit(args, n_checks, threshold_scale);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
