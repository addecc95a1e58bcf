#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "adapt/harness.hpp"

namespace adapt {

/// Configuration problem with the offending field path; the CLI maps this
/// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), field_path_(path) {}
  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

enum class ModelKind { kAnalytic, kTvLinear };

struct ExperimentConfig {
  EnvType environment = EnvType::kCar;
  double dt = 0.1;
  int steps = 100;
  int episodes = 50;
  uint64_t seed = 0;
  int jobs = 1;
  std::string output_dir = "out";

  ArmParams arm;
  Eigen::Vector2d arm_goal = {0.1, 0.1};
  double arm_torque_weight = 0.01;

  TrainConfig training;
  double restricted_margin = 0.0;

  ModelKind model = ModelKind::kAnalytic;
  TvFitConfig fit;

  MpcConfig mpc;
  DisturbanceConfig disturbances;

  std::vector<double> sweep_control_scales = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> sweep_gammas = {0.5, 1.0, 1.5, 2.0};
  std::vector<double> trend_scales = {0.0, 0.5, 1.0, 2.0};

  EnvDynamics make_source() const;
  CostFunction make_cost() const;
  RestrictedSets make_restricted_sets() const;
  HarnessConfig make_harness() const;
};

/// Parse and validate a configuration document; unknown keys are rejected
/// and defaults are materialized.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Effective configuration with every default filled in; parses back to an
/// equal configuration.
nlohmann::json config_echo(const ExperimentConfig& cfg);

uint64_t config_hash(const nlohmann::json& echo);

}  // namespace adapt
