#pragma once

#include "adapt/disturbances.hpp"
#include "adapt/mpc.hpp"
#include "adapt/policy.hpp"

namespace adapt {

enum class Mode { kIdeal, kNaive, kAdapt };

const char* mode_name(Mode mode);

struct EpisodeResult {
  Mode mode = Mode::kIdeal;
  uint64_t seed = 0;
  Trajectory realized;
  Trajectory nominal;                 // policy on source from the same s0
  std::vector<double> step_cost;      // length T
  std::vector<double> cum_cost;       // length T
  std::vector<double> baseline_cum;   // nominal-on-source cumulative cost
  std::vector<double> normalized;     // cum / baseline_cum
  std::vector<double> mpc_cost;       // C*_N per step; zero outside adapt
  std::vector<bool> saturated;        // per step
  bool diverged = false;
  int diverged_step = -1;

  double final_cost() const { return cum_cost.empty() ? 0.0 : cum_cost.back(); }
  double final_normalized() const {
    return normalized.empty() ? 1.0 : normalized.back();
  }
};

EpisodeResult run_ideal(const Policy& policy, const EnvDynamics& source,
                        const Vector& s0, const CostFunction& cost, int steps);

EpisodeResult run_naive(const Policy& policy, const EnvDynamics& source,
                        const TargetEnv& target, const Vector& s0,
                        const CostFunction& cost, int steps);

EpisodeResult run_adapt(const Policy& policy, const EnvDynamics& source,
                        const TargetEnv& target, const ApproxModel& model,
                        const MpcConfig& mpc_cfg, const Vector& s0,
                        const CostFunction& cost, int steps);

struct VerificationCheck {
  std::string name;
  bool passed = false;
  double worst_slack = 0.0;
};

struct VerificationReport {
  double lipschitz_constant = 0.0;  // L_r over the visited region
  double value_gap = 0.0;           // |V_T - V_S|
  double gap_bound = 0.0;           // L_r * sum(|s-sbar| + |a-abar|)
  VerificationCheck tube_bound;     // C* >= q_min |P_pos(s - sbar)|^2
  VerificationCheck action_bound;   // C* >= r_min |a - abar|^2, unsaturated
  VerificationCheck value_chain;    // gap <= bound

  bool all_passed() const {
    return tube_bound.passed && action_bound.passed && value_chain.passed;
  }
};

/// Empirical checks of the tracking-cost lower bounds and the Lipschitz
/// value-gap chain on one adapt episode.
VerificationReport verify_episode(const EpisodeResult& result,
                                  const CostFunction& cost,
                                  const MpcConfig& mpc_cfg,
                                  double tolerance = 1e-9);

/// Conservative Lipschitz constant of the stage cost over the region visited
/// by the realized and nominal trajectories.
double cost_lipschitz_constant(const EpisodeResult& result,
                               const CostFunction& cost);

struct ScalingPoint {
  double scale = 0.0;
  double mean_gap = 0.0;
  double std_error = 0.0;
  double support_radius = 0.0;
  int episodes = 0;
};

struct ScalingTrend {
  std::vector<ScalingPoint> points;
  bool nondecreasing = false;  // up to one inversion within 1 std error
  double fitted_slope = 0.0;   // gap vs T*sqrt(support_radius)
};

struct SweepCell {
  double control_scale = 0.0;
  double gamma = 1.0;
  Mode mode = Mode::kNaive;
  double mean = 0.0;
  double std_error = 0.0;
  int episodes = 0;
  int diverged = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

struct HarnessConfig {
  EnvDynamics source;
  CostFunction cost;
  MpcConfig mpc;
  DisturbanceConfig disturbances;
  int episode_steps = 100;
  int episodes = 50;
  uint64_t master_seed = 0;
  int jobs = 1;
  // Arm adapt episodes fit a tv-linear model around the nominal trajectory.
  bool use_tv_linear_model = false;
  TvFitConfig fit;
};

struct SuiteRow {
  std::string disturbance;
  Mode mode = Mode::kNaive;
  double mean_normalized = 0.0;
  double std_error = 0.0;
  int episodes = 0;
  int diverged = 0;
};

struct VerificationAggregate {
  std::string name;
  int episodes = 0;
  int passed = 0;
  double worst_slack = 0.0;

  double pass_rate() const {
    return episodes > 0 ? static_cast<double>(passed) / episodes : 1.0;
  }
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<VerificationAggregate> verification;  // one per check
  double verification_pass_rate = 1.0;
  int diverged = 0;
};

/// One isolated disturbance channel of the configured target.
struct SuiteVariant {
  std::string name;
  DisturbanceConfig disturbances;
};

/// Split the configured disturbances into single-channel variants: hills,
/// control_noise, process_noise, param_scale (gamma != 1 only).
std::vector<SuiteVariant> suite_variants(const DisturbanceConfig& cfg);

/// Paired naive/adapt comparison per disturbance variant plus aggregated
/// verification of every completed adapt episode.
SuiteResult run_suite(const HarnessConfig& cfg, const Policy& policy);

/// Paired naive/adapt episodes for one disturbance configuration. Episode k
/// of either mode uses the target seed derive_seed(master, k), so both see
/// the same disturbance realizations.
std::vector<EpisodeResult> run_episode_batch(const HarnessConfig& cfg,
                                             const Policy& policy, Mode mode);

/// Mean value gap |V_T - V_S| against disturbance scaling of the process
/// noise support.
ScalingTrend scaling_trend(const HarnessConfig& cfg, const Policy& policy,
                           const std::vector<double>& scales);

/// Grid over (control-noise scale, gamma) for naive and adapt, hills active.
SweepResult disturbance_sweep(const HarnessConfig& cfg, const Policy& policy,
                              const std::vector<double>& control_scales,
                              const std::vector<double>& gammas);

}  // namespace adapt
