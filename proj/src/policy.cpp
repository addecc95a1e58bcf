#include "adapt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adapt/cem.hpp"
#include "adapt/rng.hpp"

namespace adapt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}  // namespace

RestrictedSets bound_set(const BoxSpace& state_space,
                         const BoxSpace& action_space, double margin) {
  if (margin < 0.0 || margin >= 0.5) {
    throw std::invalid_argument("bound_set: margin must be in [0, 0.5)");
  }
  RestrictedSets sets;
  sets.state_space = state_space.shrunk(margin);
  sets.action_space = action_space.shrunk(margin);
  sets.margin = margin;
  return sets;
}

int Mlp::param_count() const {
  return hidden_dim * input_dim + hidden_dim + hidden_dim * hidden_dim +
         hidden_dim + output_dim * hidden_dim + output_dim;
}

Vector Mlp::forward(const Vector& features) const {
  if (features.size() != input_dim || theta.size() != param_count()) {
    throw std::invalid_argument("Mlp::forward: dimension mismatch");
  }
  const double* p = theta.data();
  using MapM = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>;
  using MapV = Eigen::Map<const Vector>;
  MapM w1(p, hidden_dim, input_dim);
  p += hidden_dim * input_dim;
  MapV b1(p, hidden_dim);
  p += hidden_dim;
  MapM w2(p, hidden_dim, hidden_dim);
  p += hidden_dim * hidden_dim;
  MapV b2(p, hidden_dim);
  p += hidden_dim;
  MapM w3(p, output_dim, hidden_dim);
  p += output_dim * hidden_dim;
  MapV b3(p, output_dim);
  Vector h1 = ((w1 * features + b1).array().max(0.0)).matrix();
  Vector h2 = ((w2 * h1 + b2).array().max(0.0)).matrix();
  return w3 * h2 + b3;
}

Vector Policy::featurize(const Vector& s) const {
  if (env == EnvType::kCar) {
    return s;
  }
  // [sin q, cos q, qdot, goal, ee - goal]
  Vector f(10);
  const Eigen::Vector2d ee = arm_end_effector(s, arm_params);
  f << std::sin(s[0]), std::sin(s[1]), std::cos(s[0]), std::cos(s[1]), s[2],
      s[3], arm_goal[0], arm_goal[1], ee[0] - arm_goal[0], ee[1] - arm_goal[1];
  return f;
}

Vector Policy::eval(const Vector& s) const {
  if (!s.allFinite()) {
    throw std::invalid_argument("Policy::eval: non-finite state");
  }
  Vector out = net.forward(featurize(s));
  if (!out.allFinite()) {
    throw std::runtime_error("Policy::eval: non-finite output");
  }
  return action_space.clamp(out);
}

Policy make_policy(EnvType env, const RestrictedSets& sets,
                   const Eigen::Vector2d& arm_goal, const ArmParams& arm_params) {
  Policy p;
  p.env = env;
  p.arm_goal = arm_goal;
  p.arm_params = arm_params;
  p.action_space = sets.action_space;
  p.net.input_dim = env == EnvType::kCar ? kCarStateDim : 10;
  p.net.output_dim = static_cast<int>(sets.action_space.dim());
  p.net.theta = Vector::Zero(p.net.param_count());
  return p;
}

double CostFunction::step_cost(const Vector& s, const Vector& a) const {
  if (env == EnvType::kCar) {
    return s[0] * s[0] + s[1] * s[1] + a[0] * a[0] + a[1] * a[1];
  }
  const Eigen::Vector2d ee = arm_end_effector(s, arm_params);
  return (ee - arm_goal).squaredNorm() + arm_torque_weight * a.squaredNorm();
}

double episode_cost(const Trajectory& traj, const CostFunction& cost) {
  if (traj.states.size() != traj.actions.size() + 1) {
    throw std::invalid_argument("episode_cost: inconsistent trajectory");
  }
  double total = 0.0;
  for (size_t t = 0; t < traj.actions.size(); ++t) {
    total += cost.step_cost(traj.states[t], traj.actions[t]);
  }
  return total;
}

Trajectory rollout_nominal(const Policy& policy, const EnvDynamics& source,
                           const Vector& s0, int steps) {
  if (!source.state_box.contains(s0)) {
    throw std::invalid_argument("rollout_nominal: s0 outside state space");
  }
  Trajectory traj;
  traj.dt = source.dt;
  traj.states.reserve(steps + 1);
  traj.actions.reserve(steps);
  traj.states.push_back(s0);
  Vector s = s0;
  for (int t = 0; t < steps; ++t) {
    const Vector a = policy.eval(s);
    s = source.step(s, a);
    if (!s.allFinite()) {
      throw std::runtime_error("rollout_nominal: diverged at step " +
                               std::to_string(t));
    }
    traj.actions.push_back(a);
    traj.states.push_back(s);
  }
  return traj;
}

Vector sample_initial_state(EnvType env, std::mt19937_64& rng) {
  if (env == EnvType::kCar) {
    std::uniform_real_distribution<double> upos(-5.0, 5.0);
    std::uniform_real_distribution<double> uang(-kPi, kPi);
    Vector s(kCarStateDim);
    s << upos(rng), upos(rng), uang(rng), 0.0, 0.0;
    return s;
  }
  return Vector::Zero(kArmStateDim);
}

namespace {

double truncated_gaussian(std::mt19937_64& rng, double mean, double std) {
  if (std == 0.0) return mean;
  std::normal_distribution<double> n(0.0, 1.0);
  const double z = std::clamp(n(rng), -3.0, 3.0);
  return mean + std * z;
}

EnvDynamics randomized_env(const EnvDynamics& source,
                           const RandomizationConfig& rnd,
                           std::mt19937_64& rng) {
  EnvDynamics env = source;
  if (rnd.std == 0.0) return env;
  if (source.type == EnvType::kCar) {
    env.car.speed = truncated_gaussian(rng, rnd.mean, rnd.std);
    env.car.heading = truncated_gaussian(rng, rnd.mean, rnd.std);
    env.car.curvature = truncated_gaussian(rng, rnd.mean, rnd.std);
    env.car.accel = truncated_gaussian(rng, rnd.mean, rnd.std);
    env.car.kappa_rate = truncated_gaussian(rng, rnd.mean, rnd.std);
  } else {
    const double scale =
        std::max(0.1, truncated_gaussian(rng, rnd.mean, rnd.std));
    env.arm.m1 *= scale;
    env.arm.m2 *= scale;
  }
  return env;
}

}  // namespace

TrainResult train_policy(const EnvDynamics& source, const CostFunction& cost,
                         const RestrictedSets& sets, const TrainConfig& cfg) {
  Policy proto = make_policy(source.type, sets, cost.arm_goal, cost.arm_params);

  // Mean episode cost of one parameter vector; +inf on S'-violation or
  // numerical failure. Rollout seeds depend only on (master seed, rollout
  // index): common random numbers across candidates and iterations.
  auto objective = [&](const Vector& theta) {
    Policy policy = proto;
    policy.net.theta = theta;
    double total = 0.0;
    for (int r = 0; r < cfg.rollouts_per_candidate; ++r) {
      std::mt19937_64 rng(derive_seed(cfg.seed, 0xC0FFEEULL, r));
      const Vector s0 = sample_initial_state(source.type, rng);
      const EnvDynamics env = randomized_env(source, cfg.randomization, rng);
      Vector s = s0;
      double ep = 0.0;
      for (int t = 0; t < cfg.episode_steps; ++t) {
        Vector a;
        try {
          a = policy.eval(s);
          ep += cost.step_cost(s, a);
          s = env.step(s, a);
        } catch (const std::exception&) {
          return std::numeric_limits<double>::infinity();
        }
        if (!s.allFinite() || !sets.state_space.contains(s)) {
          return std::numeric_limits<double>::infinity();
        }
      }
      total += ep;
    }
    return total / cfg.rollouts_per_candidate;
  };

  CemOptions opts;
  opts.population = cfg.population;
  opts.elite_fraction = cfg.elite_fraction;
  opts.iterations = cfg.iterations;
  opts.init_std = cfg.init_std;
  opts.std_floor = cfg.std_floor;
  opts.seed = cfg.seed;
  opts.jobs = cfg.jobs;
  const CemResult cem = cem_minimize(proto.net.param_count(), objective, opts);

  TrainResult result;
  result.policy = proto;
  result.policy.net.theta = cem.best;
  result.best_cost_curve = cem.best_cost_curve;
  result.elite_mean_curve = cem.elite_mean_curve;
  return result;
}

}  // namespace adapt
