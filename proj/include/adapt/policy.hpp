#pragma once

#include <random>

#include "adapt/dynamics.hpp"
#include "adapt/types.hpp"

namespace adapt {

struct RestrictedSets {
  BoxSpace state_space;   // S'
  BoxSpace action_space;  // A'
  double margin = 0.0;
};

/// Shrink S and A symmetrically; margin 0 gives S' = S, A' = A.
RestrictedSets bound_set(const BoxSpace& state_space,
                         const BoxSpace& action_space, double margin);

/// Feedforward net: input -> 64 -> 64 -> action, ReLU hidden, linear head.
struct Mlp {
  int input_dim = 0;
  int hidden_dim = 64;
  int output_dim = 0;
  Vector theta;  // row-major [W1, b1, W2, b2, W3, b3]

  int param_count() const;
  Vector forward(const Vector& features) const;
};

/// Deterministic policy: featurize, forward pass, clamp to A'.
struct Policy {
  EnvType env = EnvType::kCar;
  Eigen::Vector2d arm_goal = {0.1, 0.1};
  ArmParams arm_params;
  Mlp net;
  BoxSpace action_space;  // A'

  Vector featurize(const Vector& s) const;
  Vector eval(const Vector& s) const;
};

Policy make_policy(EnvType env, const RestrictedSets& sets,
                   const Eigen::Vector2d& arm_goal = {0.1, 0.1},
                   const ArmParams& arm_params = {});

struct CostFunction {
  EnvType env = EnvType::kCar;
  Eigen::Vector2d arm_goal = {0.1, 0.1};
  ArmParams arm_params;
  double arm_torque_weight = 0.01;

  double step_cost(const Vector& s, const Vector& a) const;
};

double episode_cost(const Trajectory& traj, const CostFunction& cost);

/// Per-rollout Gaussian randomization scales for domain-randomized training.
/// Zero std on every channel reduces training to the plain deterministic
/// source.
struct RandomizationConfig {
  double mean = 1.0;
  double std = 0.0;  // per-multiplier, truncated at +-3 std
};

struct TrainConfig {
  int population = 48;
  double elite_fraction = 0.125;
  int iterations = 60;
  int rollouts_per_candidate = 4;
  double init_std = 0.5;
  double std_floor = 1e-3;
  int episode_steps = 100;
  RandomizationConfig randomization;
  uint64_t seed = 0;
  int jobs = 1;
};

struct TrainResult {
  Policy policy;
  std::vector<double> best_cost_curve;   // best-seen after each iteration
  std::vector<double> elite_mean_curve;  // elite mean per iteration
};

/// Cross-entropy-method search over policy parameters on the source
/// simulator. Candidates whose rollouts leave S' or produce non-finite cost
/// are discarded (+inf).
TrainResult train_policy(const EnvDynamics& source, const CostFunction& cost,
                         const RestrictedSets& sets, const TrainConfig& cfg);

/// Closed-loop rollout of the policy on the deterministic source dynamics.
Trajectory rollout_nominal(const Policy& policy, const EnvDynamics& source,
                           const Vector& s0, int steps);

/// Draw an initial state for the environment: car position uniform in
/// [-5,5]^2, heading uniform [-pi,pi), v = kappa = 0; arm fixed at rest.
Vector sample_initial_state(EnvType env, std::mt19937_64& rng);

}  // namespace adapt
