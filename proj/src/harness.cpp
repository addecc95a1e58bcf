#include "adapt/harness.hpp"

#include <cmath>

#include "adapt/parallel.hpp"
#include "adapt/rng.hpp"

namespace adapt {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kIdeal: return "ideal";
    case Mode::kNaive: return "naive";
    case Mode::kAdapt: return "adapt";
  }
  return "unknown";
}

namespace {

/// Fill cost series from realized/nominal trajectories. When the baseline
/// cumulative cost is zero so is the realized one (same start, zero stage
/// cost), and the ratio is defined as 1.
void score_episode(EpisodeResult& result, const CostFunction& cost) {
  const int steps = result.realized.horizon();
  result.step_cost.resize(steps);
  result.cum_cost.resize(steps);
  result.baseline_cum.resize(steps);
  result.normalized.resize(steps);
  double cum = 0.0;
  double base = 0.0;
  for (int t = 0; t < steps; ++t) {
    result.step_cost[t] =
        cost.step_cost(result.realized.states[t], result.realized.actions[t]);
    cum += result.step_cost[t];
    base += cost.step_cost(result.nominal.states[t], result.nominal.actions[t]);
    result.cum_cost[t] = cum;
    result.baseline_cum[t] = base;
    result.normalized[t] = base > 0.0 ? cum / base : (cum > 0.0 ? INFINITY : 1.0);
  }
  if (result.mpc_cost.empty()) result.mpc_cost.assign(steps, 0.0);
  if (result.saturated.empty()) result.saturated.assign(steps, false);
}

}  // namespace

EpisodeResult run_ideal(const Policy& policy, const EnvDynamics& source,
                        const Vector& s0, const CostFunction& cost, int steps) {
  EpisodeResult result;
  result.mode = Mode::kIdeal;
  result.nominal = rollout_nominal(policy, source, s0, steps);
  result.realized = result.nominal;
  score_episode(result, cost);
  return result;
}

EpisodeResult run_naive(const Policy& policy, const EnvDynamics& source,
                        const TargetEnv& target, const Vector& s0,
                        const CostFunction& cost, int steps) {
  EpisodeResult result;
  result.mode = Mode::kNaive;
  result.seed = target.seed();
  result.nominal = rollout_nominal(policy, source, s0, steps);
  result.realized.dt = source.dt;
  result.realized.states.push_back(s0);
  Vector s = s0;
  for (int t = 0; t < steps; ++t) {
    const Vector a = policy.eval(s);
    try {
      s = target.step(s, a, t);
    } catch (const std::exception&) {
      result.diverged = true;
      result.diverged_step = t;
      break;
    }
    result.realized.actions.push_back(a);
    result.realized.states.push_back(s);
  }
  if (result.diverged) {
    // Truncate to a consistent trajectory; scores cover completed steps.
    result.realized.states.resize(result.realized.actions.size() + 1);
  }
  score_episode(result, cost);
  return result;
}

EpisodeResult run_adapt(const Policy& policy, const EnvDynamics& source,
                        const TargetEnv& target, const ApproxModel& model,
                        const MpcConfig& mpc_cfg, const Vector& s0,
                        const CostFunction& cost, int steps) {
  EpisodeResult result;
  result.mode = Mode::kAdapt;
  result.seed = target.seed();
  result.nominal = rollout_nominal(policy, source, s0, steps);
  result.realized.dt = source.dt;
  result.realized.states.push_back(s0);
  Vector s = s0;
  for (int t = 0; t < steps; ++t) {
    try {
      const MpcSolution mpc = aux_mpc(s, t, result.nominal, model, mpc_cfg);
      result.mpc_cost.push_back(mpc.cost);
      result.saturated.push_back(mpc.saturated);
      s = target.step(s, mpc.action, t);
      result.realized.actions.push_back(mpc.action);
      result.realized.states.push_back(s);
    } catch (const std::exception&) {
      result.diverged = true;
      result.diverged_step = t;
      break;
    }
  }
  if (result.diverged) {
    result.realized.states.resize(result.realized.actions.size() + 1);
    result.mpc_cost.resize(result.realized.actions.size());
    result.saturated.resize(result.realized.actions.size());
  }
  score_episode(result, cost);
  return result;
}

double cost_lipschitz_constant(const EpisodeResult& result,
                               const CostFunction& cost) {
  if (cost.env == EnvType::kCar) {
    // grad of x^2+y^2+av^2+ak^2 has norm 2|(x,y,av,ak)|; for a quadratic the
    // segment bound is attained at an endpoint.
    double max_norm = 0.0;
    auto visit = [&](const Trajectory& traj) {
      for (size_t t = 0; t < traj.actions.size(); ++t) {
        const Vector& s = traj.states[t];
        const Vector& a = traj.actions[t];
        const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] +
                                      a[0] * a[0] + a[1] * a[1]);
        max_norm = std::max(max_norm, norm);
      }
    };
    visit(result.realized);
    visit(result.nominal);
    return 2.0 * max_norm;
  }
  // Arm: |d ee/dq| <= sqrt((l1+l2)^2 + l2^2) and the end effector stays in
  // the disk of radius l1+l2, so the distance term is globally Lipschitz.
  const ArmParams& p = cost.arm_params;
  const double jac_bound =
      std::sqrt((p.l1 + p.l2) * (p.l1 + p.l2) + p.l2 * p.l2);
  const double dist_bound = cost.arm_goal.norm() + p.l1 + p.l2;
  const double l_state = 2.0 * jac_bound * dist_bound;
  double max_torque = 0.0;
  auto visit = [&](const Trajectory& traj) {
    for (const Vector& a : traj.actions) {
      max_torque = std::max(max_torque, a.norm());
    }
  };
  visit(result.realized);
  visit(result.nominal);
  const double l_action = 2.0 * cost.arm_torque_weight * max_torque;
  return std::max(l_state, l_action);
}

VerificationReport verify_episode(const EpisodeResult& result,
                                  const CostFunction& cost,
                                  const MpcConfig& mpc_cfg, double tolerance) {
  VerificationReport report;
  report.lipschitz_constant = cost_lipschitz_constant(result, cost);

  double q_min = INFINITY;
  std::vector<int> pos_dims;
  for (Eigen::Index i = 0; i < mpc_cfg.q_diag.size(); ++i) {
    if (mpc_cfg.q_diag[i] > 0.0) {
      q_min = std::min(q_min, mpc_cfg.q_diag[i]);
      pos_dims.push_back(static_cast<int>(i));
    }
  }
  const double r_min = mpc_cfg.r_diag.minCoeff();

  report.tube_bound.name = "tube_lower_bound";
  report.action_bound.name = "action_lower_bound";
  report.value_chain.name = "value_gap_chain";
  report.tube_bound.worst_slack = INFINITY;
  report.action_bound.worst_slack = INFINITY;

  const int steps = result.realized.horizon();
  double deviation_sum = 0.0;
  for (int t = 0; t < steps; ++t) {
    const Vector ds = result.realized.states[t] - result.nominal.states[t];
    const Vector da = result.realized.actions[t] - result.nominal.actions[t];
    deviation_sum += ds.norm() + da.norm();

    double pos_sq = 0.0;
    for (int i : pos_dims) pos_sq += ds[i] * ds[i];
    report.tube_bound.worst_slack = std::min(
        report.tube_bound.worst_slack, result.mpc_cost[t] - q_min * pos_sq);
    if (!result.saturated[t]) {
      report.action_bound.worst_slack =
          std::min(report.action_bound.worst_slack,
                   result.mpc_cost[t] - r_min * da.squaredNorm());
    }
  }
  report.tube_bound.passed = report.tube_bound.worst_slack >= -tolerance;
  report.action_bound.passed = report.action_bound.worst_slack >= -tolerance;

  const double v_target = result.final_cost();
  const double v_source =
      result.baseline_cum.empty() ? 0.0 : result.baseline_cum.back();
  report.value_gap = std::abs(v_target - v_source);
  report.gap_bound = report.lipschitz_constant * deviation_sum;
  report.value_chain.worst_slack = report.gap_bound - report.value_gap;
  report.value_chain.passed = report.value_chain.worst_slack >= -tolerance;
  return report;
}

namespace {

std::unique_ptr<ApproxModel> build_model(const HarnessConfig& cfg,
                                         const Trajectory& nominal,
                                         uint64_t fit_seed) {
  if (cfg.use_tv_linear_model) {
    return std::make_unique<TvLinearModel>(
        fit_tv_linear(cfg.source, nominal, cfg.fit, fit_seed));
  }
  return std::make_unique<AnalyticModel>(cfg.source);
}

}  // namespace

std::vector<EpisodeResult> run_episode_batch(const HarnessConfig& cfg,
                                             const Policy& policy, Mode mode) {
  std::vector<EpisodeResult> results(cfg.episodes);
  parallel_for(cfg.episodes, cfg.jobs, [&](int k) {
    std::mt19937_64 init_rng(derive_seed(cfg.master_seed, 0x1A17ULL, k));
    const Vector s0 = sample_initial_state(cfg.source.type, init_rng);
    const uint64_t target_seed = derive_seed(cfg.master_seed, 0x7A46ULL, k);
    try {
      switch (mode) {
        case Mode::kIdeal:
          results[k] = run_ideal(policy, cfg.source, s0, cfg.cost,
                                 cfg.episode_steps);
          break;
        case Mode::kNaive: {
          TargetEnv target(cfg.source, cfg.disturbances, target_seed,
                           cfg.episode_steps);
          results[k] = run_naive(policy, cfg.source, target, s0, cfg.cost,
                                 cfg.episode_steps);
          break;
        }
        case Mode::kAdapt: {
          TargetEnv target(cfg.source, cfg.disturbances, target_seed,
                           cfg.episode_steps);
          const Trajectory nominal =
              rollout_nominal(policy, cfg.source, s0, cfg.episode_steps);
          const auto model = build_model(
              cfg, nominal, derive_seed(cfg.master_seed, 0xF17ULL, k));
          results[k] = run_adapt(policy, cfg.source, target, *model, cfg.mpc,
                                 s0, cfg.cost, cfg.episode_steps);
          break;
        }
      }
    } catch (const std::exception&) {
      results[k].mode = mode;
      results[k].diverged = true;
    }
    results[k].seed = target_seed;
  });
  return results;
}

namespace {

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

MeanStderr mean_stderr(const std::vector<double>& values) {
  MeanStderr out;
  for (double v : values) {
    if (std::isfinite(v)) {
      out.mean += v;
      ++out.count;
    }
  }
  if (out.count == 0) return out;
  out.mean /= out.count;
  double var = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) var += (v - out.mean) * (v - out.mean);
  }
  if (out.count > 1) {
    out.std_error = std::sqrt(var / (out.count - 1) / out.count);
  }
  return out;
}

}  // namespace

ScalingTrend scaling_trend(const HarnessConfig& cfg, const Policy& policy,
                           const std::vector<double>& scales) {
  if (!cfg.disturbances.process_noise.has_value()) {
    throw std::invalid_argument("scaling_trend: process noise must be configured");
  }
  ScalingTrend trend;
  for (double scale : scales) {
    HarnessConfig scaled = cfg;
    if (scale == 0.0) {
      scaled.disturbances.process_noise.reset();
    } else {
      scaled.disturbances.process_noise->lower *= scale;
      scaled.disturbances.process_noise->upper *= scale;
    }
    const auto episodes = run_episode_batch(scaled, policy, Mode::kAdapt);
    std::vector<double> gaps;
    for (const auto& ep : episodes) {
      if (ep.diverged) continue;
      gaps.push_back(std::abs(ep.final_cost() - ep.baseline_cum.back()));
    }
    const MeanStderr stats = mean_stderr(gaps);
    ScalingPoint point;
    point.scale = scale;
    point.mean_gap = stats.mean;
    point.std_error = stats.std_error;
    point.episodes = stats.count;
    TargetEnv probe(scaled.source, scaled.disturbances,
                    derive_seed(cfg.master_seed, 0x9999ULL), cfg.episode_steps);
    point.support_radius = probe.support_radius();
    trend.points.push_back(point);
  }

  int inversions = 0;
  for (size_t i = 1; i < trend.points.size(); ++i) {
    const auto& prev = trend.points[i - 1];
    const auto& cur = trend.points[i];
    if (cur.mean_gap < prev.mean_gap) {
      ++inversions;
      const double tol = std::max(cur.std_error, prev.std_error);
      if (prev.mean_gap - cur.mean_gap > tol) inversions = 2;  // hard fail
    }
  }
  trend.nondecreasing = inversions <= 1;

  double num = 0.0, den = 0.0;
  for (const auto& p : trend.points) {
    const double x = cfg.episode_steps * std::sqrt(p.support_radius);
    num += x * p.mean_gap;
    den += x * x;
  }
  trend.fitted_slope = den > 0.0 ? num / den : 0.0;
  return trend;
}

std::vector<SuiteVariant> suite_variants(const DisturbanceConfig& cfg) {
  std::vector<SuiteVariant> variants;
  if (cfg.hills.has_value()) {
    SuiteVariant v;
    v.name = "hills";
    v.disturbances.hills = cfg.hills;
    variants.push_back(std::move(v));
  }
  if (cfg.control_noise.has_value()) {
    SuiteVariant v;
    v.name = "control_noise";
    v.disturbances.control_noise = cfg.control_noise;
    variants.push_back(std::move(v));
  }
  if (cfg.process_noise.has_value()) {
    SuiteVariant v;
    v.name = "process_noise";
    v.disturbances.process_noise = cfg.process_noise;
    variants.push_back(std::move(v));
  }
  if (cfg.gamma != 1.0) {
    SuiteVariant v;
    v.name = "param_scale";
    v.disturbances.gamma = cfg.gamma;
    variants.push_back(std::move(v));
  }
  return variants;
}

SuiteResult run_suite(const HarnessConfig& cfg, const Policy& policy) {
  const auto variants = suite_variants(cfg.disturbances);
  if (variants.empty()) {
    throw std::invalid_argument("run_suite: no disturbances configured");
  }
  SuiteResult suite;
  suite.verification = {{"tube_lower_bound", 0, 0, INFINITY},
                        {"action_lower_bound", 0, 0, INFINITY},
                        {"value_gap_chain", 0, 0, INFINITY}};
  for (const SuiteVariant& variant : variants) {
    HarnessConfig vcfg = cfg;
    vcfg.disturbances = variant.disturbances;
    for (Mode mode : {Mode::kNaive, Mode::kAdapt}) {
      const auto episodes = run_episode_batch(vcfg, policy, mode);
      std::vector<double> finals;
      int diverged = 0;
      for (const auto& ep : episodes) {
        if (ep.diverged) {
          ++diverged;
          continue;
        }
        finals.push_back(ep.final_normalized());
        if (mode == Mode::kAdapt) {
          const VerificationReport report =
              verify_episode(ep, cfg.cost, cfg.mpc);
          const VerificationCheck* checks[3] = {
              &report.tube_bound, &report.action_bound, &report.value_chain};
          for (int i = 0; i < 3; ++i) {
            VerificationAggregate& agg = suite.verification[i];
            ++agg.episodes;
            if (checks[i]->passed) ++agg.passed;
            agg.worst_slack = std::min(agg.worst_slack, checks[i]->worst_slack);
          }
        }
      }
      const MeanStderr stats = mean_stderr(finals);
      SuiteRow row;
      row.disturbance = variant.name;
      row.mode = mode;
      row.mean_normalized = stats.mean;
      row.std_error = stats.std_error;
      row.episodes = stats.count;
      row.diverged = diverged;
      suite.rows.push_back(row);
      suite.diverged += diverged;
    }
  }
  int total = 0, passed = 0;
  for (const VerificationAggregate& agg : suite.verification) {
    total += agg.episodes;
    passed += agg.passed;
  }
  suite.verification_pass_rate =
      total > 0 ? static_cast<double>(passed) / total : 1.0;
  return suite;
}

SweepResult disturbance_sweep(const HarnessConfig& cfg, const Policy& policy,
                              const std::vector<double>& control_scales,
                              const std::vector<double>& gammas) {
  if (!cfg.disturbances.control_noise.has_value()) {
    throw std::invalid_argument("disturbance_sweep: control noise must be configured");
  }
  SweepResult result;
  for (double cs : control_scales) {
    for (double gamma : gammas) {
      HarnessConfig cell_cfg = cfg;
      if (cs == 0.0) {
        cell_cfg.disturbances.control_noise.reset();
      } else {
        cell_cfg.disturbances.control_noise->lower *= cs;
        cell_cfg.disturbances.control_noise->upper *= cs;
      }
      cell_cfg.disturbances.gamma = gamma;
      for (Mode mode : {Mode::kNaive, Mode::kAdapt}) {
        const auto episodes = run_episode_batch(cell_cfg, policy, mode);
        std::vector<double> finals;
        int diverged = 0;
        for (const auto& ep : episodes) {
          if (ep.diverged) {
            ++diverged;
            continue;
          }
          finals.push_back(ep.final_normalized());
        }
        const MeanStderr stats = mean_stderr(finals);
        SweepCell cell;
        cell.control_scale = cs;
        cell.gamma = gamma;
        cell.mode = mode;
        cell.mean = stats.mean;
        cell.std_error = stats.std_error;
        cell.episodes = stats.count;
        cell.diverged = diverged;
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

}  // namespace adapt
