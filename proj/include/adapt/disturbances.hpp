#pragma once

#include <optional>
#include <random>

#include "adapt/dynamics.hpp"
#include "adapt/types.hpp"

namespace adapt {

struct Hill {
  Eigen::Vector2d center;
  double radius = 1.0;
  double height = 0.1;
};

/// Cosine-bump hill landscape; height and gradient are smooth everywhere.
struct HillField {
  std::vector<Hill> hills;

  double height_at(double x, double y) const;
  Eigen::Vector2d gradient_at(double x, double y) const;
};

struct HillConfig {
  int count = 20;
  double radius_min = 0.5;
  double radius_max = 2.0;
  double height_min = 0.05;
  double height_max = 0.3;
};

HillField generate_hills(std::mt19937_64& rng, const BoxSpace& workspace,
                         const HillConfig& cfg = {});

/// Longitudinal acceleration from gravity on the hill landscape; positive
/// when the slope along the heading is downhill.
double hill_accel(const HillField& field, const Vector& s);

struct UniformNoise {
  Vector lower;
  Vector upper;
};

Vector sample_noise(const UniformNoise& noise, std::mt19937_64& rng);

struct DisturbanceConfig {
  std::optional<HillConfig> hills;
  std::optional<UniformNoise> control_noise;
  std::optional<UniformNoise> process_noise;
  double gamma = 1.0;  // parameter-error scale; 1 disables

  bool any_active() const {
    return hills.has_value() || control_noise.has_value() ||
           process_noise.has_value() || gamma != 1.0;
  }
};

/// Target environment: source dynamics plus the active disturbances.
/// Noise realizations are precomputed from the seed as a function of the
/// step index only, so naive/adapt runs with the same seed see identical
/// disturbance streams.
class TargetEnv {
 public:
  TargetEnv(EnvDynamics source, DisturbanceConfig cfg, uint64_t seed,
            int episode_steps);

  /// s_{t+1} = f_target(s_t, a_t) + w_t. Expects a already clamped to A.
  Vector step(const Vector& s, const Vector& a, int t) const;

  /// Upper estimate of the per-step state-disturbance norm.
  double support_radius(int hill_samples = 4096) const;

  const EnvDynamics& source() const { return source_; }
  const EnvDynamics& scaled() const { return scaled_; }
  const DisturbanceConfig& config() const { return cfg_; }
  const std::optional<HillField>& hill_field() const { return field_; }
  uint64_t seed() const { return seed_; }
  int episode_steps() const { return steps_; }

 private:
  EnvDynamics source_;
  EnvDynamics scaled_;  // source with gamma applied
  DisturbanceConfig cfg_;
  uint64_t seed_ = 0;
  int steps_ = 0;
  std::optional<HillField> field_;
  std::vector<Vector> control_noise_;  // one draw per step
  std::vector<Vector> process_noise_;
};

/// Workspace box for hill generation: the x/y position range of the car.
BoxSpace car_workspace();

}  // namespace adapt
