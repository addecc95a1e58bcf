#include "adapt/disturbances.hpp"

#include <cmath>

namespace adapt {

namespace {
constexpr double kGravity = 9.81;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double HillField::height_at(double x, double y) const {
  double h = 0.0;
  for (const Hill& hill : hills) {
    const double d = (Eigen::Vector2d(x, y) - hill.center).norm();
    if (d < hill.radius) {
      h += 0.5 * hill.height * (1.0 + std::cos(kPi * d / hill.radius));
    }
  }
  return h;
}

Eigen::Vector2d HillField::gradient_at(double x, double y) const {
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  for (const Hill& hill : hills) {
    const Eigen::Vector2d rel = Eigen::Vector2d(x, y) - hill.center;
    const double d = rel.norm();
    if (d > 1e-12 && d < hill.radius) {
      const double dh =
          -0.5 * hill.height * (kPi / hill.radius) * std::sin(kPi * d / hill.radius);
      grad += (dh / d) * rel;
    }
  }
  return grad;
}

HillField generate_hills(std::mt19937_64& rng, const BoxSpace& workspace,
                         const HillConfig& cfg) {
  std::uniform_real_distribution<double> ux(workspace.lower[0],
                                            workspace.upper[0]);
  std::uniform_real_distribution<double> uy(workspace.lower[1],
                                            workspace.upper[1]);
  std::uniform_real_distribution<double> ur(cfg.radius_min, cfg.radius_max);
  std::uniform_real_distribution<double> uh(cfg.height_min, cfg.height_max);
  HillField field;
  field.hills.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    Hill h;
    h.center = {ux(rng), uy(rng)};
    h.radius = ur(rng);
    h.height = uh(rng);
    field.hills.push_back(h);
  }
  return field;
}

double hill_accel(const HillField& field, const Vector& s) {
  const Eigen::Vector2d grad = field.gradient_at(s[0], s[1]);
  const Eigen::Vector2d heading(std::cos(s[2]), std::sin(s[2]));
  return -kGravity * grad.dot(heading);
}

Vector sample_noise(const UniformNoise& noise, std::mt19937_64& rng) {
  Vector w(noise.lower.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    std::uniform_real_distribution<double> u(noise.lower[i], noise.upper[i]);
    w[i] = u(rng);
  }
  return w;
}

TargetEnv::TargetEnv(EnvDynamics source, DisturbanceConfig cfg, uint64_t seed,
                     int episode_steps)
    : source_(source), scaled_(source), cfg_(std::move(cfg)), seed_(seed),
      steps_(episode_steps) {
  if (cfg_.gamma <= 0.0) {
    throw std::invalid_argument("TargetEnv: gamma must be positive");
  }
  if (source_.type == EnvType::kCar) {
    scaled_.car.kappa_rate *= cfg_.gamma;
  } else {
    scaled_.arm.m1 *= cfg_.gamma;
    scaled_.arm.m2 *= cfg_.gamma;
  }
  std::mt19937_64 rng(seed_);
  if (cfg_.hills.has_value()) {
    if (source_.type != EnvType::kCar) {
      throw std::invalid_argument("TargetEnv: hills require the car");
    }
    field_ = generate_hills(rng, car_workspace(), *cfg_.hills);
  }
  control_noise_.reserve(steps_);
  process_noise_.reserve(steps_);
  for (int t = 0; t < steps_; ++t) {
    if (cfg_.control_noise.has_value()) {
      control_noise_.push_back(sample_noise(*cfg_.control_noise, rng));
    }
    if (cfg_.process_noise.has_value()) {
      process_noise_.push_back(sample_noise(*cfg_.process_noise, rng));
    }
  }
}

Vector TargetEnv::step(const Vector& s, const Vector& a, int t) const {
  Vector a_eff = a;
  if (cfg_.control_noise.has_value()) {
    a_eff += control_noise_[t];
  }
  Vector next;
  if (field_.has_value()) {
    const HillField& field = *field_;
    auto deriv = [this, &field](const Vector& x, const Vector& u) {
      Vector d = scaled_.derivative(x, u);
      d[3] += hill_accel(field, x);
      return d;
    };
    next = integrate_step(deriv, s, a_eff, scaled_.dt);
  } else {
    next = scaled_.step(s, a_eff);
  }
  if (cfg_.process_noise.has_value()) {
    next += process_noise_[t];
  }
  if (!next.allFinite()) {
    throw std::runtime_error("TargetEnv::step: non-finite state at t=" +
                             std::to_string(t));
  }
  return next;
}

double TargetEnv::support_radius(int hill_samples) const {
  double radius = 0.0;
  auto corner_norm = [](const UniformNoise& n) {
    return n.lower.cwiseAbs().cwiseMax(n.upper.cwiseAbs()).norm();
  };
  if (cfg_.process_noise.has_value()) {
    radius += corner_norm(*cfg_.process_noise);
  }
  if (cfg_.control_noise.has_value()) {
    // Propagate the control-noise box corner through the discretized B at a
    // representative state.
    Vector s0 = Vector::Zero(source_.state_dim());
    Vector a0 = Vector::Zero(source_.action_dim());
    Matrix ac, bc;
    source_.jacobians(s0, a0, ac, bc);
    const LinearizedStep lin = discretize_jacobians(ac, bc, source_.dt);
    const double b_norm =
        Eigen::JacobiSVD<Matrix>(lin.B).singularValues()(0);
    radius += b_norm * corner_norm(*cfg_.control_noise);
  }
  if (field_.has_value()) {
    // Sampled maximum slope over the workspace, entering through v-dot.
    const BoxSpace ws = car_workspace();
    const int grid = std::max(2, static_cast<int>(std::sqrt(hill_samples)));
    double max_accel = 0.0;
    Vector probe = Vector::Zero(kCarStateDim);
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        probe[0] = ws.lower[0] + (ws.upper[0] - ws.lower[0]) * i / (grid - 1);
        probe[1] = ws.lower[1] + (ws.upper[1] - ws.lower[1]) * j / (grid - 1);
        const double g =
            kGravity * field_->gradient_at(probe[0], probe[1]).norm();
        max_accel = std::max(max_accel, g);
      }
    }
    radius += source_.dt * max_accel;
  }
  return radius;
}

BoxSpace car_workspace() {
  Vector lo(2), hi(2);
  lo << -5.0, -5.0;
  hi << 5.0, 5.0;
  return BoxSpace(lo, hi);
}

}  // namespace adapt
