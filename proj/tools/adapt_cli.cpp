#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "adapt/config.hpp"
#include "adapt/io.hpp"
#include "adapt/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitArtifact = 3;
constexpr int kExitDiverged = 4;

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("ADAPT_LOG");
  if (!env) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level <= threshold) std::cerr << msg << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string policy_path;
  std::string mode = "adapt";
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  int episodes = 0;
};

int effective_jobs(const adapt::ExperimentConfig& cfg, int flag_jobs) {
  if (flag_jobs > 0) return flag_jobs;
  if (cfg.jobs > 0) return cfg.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

adapt::ExperimentConfig load_and_override(const CommonFlags& flags) {
  adapt::ExperimentConfig cfg = adapt::load_config(flags.config_path);
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.episodes > 0) cfg.episodes = flags.episodes;
  cfg.jobs = effective_jobs(cfg, flags.jobs);
  cfg.training.jobs = cfg.jobs;
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  fs::create_directories(cfg.output_dir);
  return cfg;
}

json seed_table(const adapt::ExperimentConfig& cfg) {
  json table = json::array();
  for (int k = 0; k < cfg.episodes; ++k) {
    table.push_back({{"episode", k},
                     {"init_seed", adapt::derive_seed(cfg.seed, 0x1A17ULL, k)},
                     {"target_seed", adapt::derive_seed(cfg.seed, 0x7A46ULL, k)},
                     {"fit_seed", adapt::derive_seed(cfg.seed, 0xF17ULL, k)}});
  }
  return table;
}

void write_manifest(const adapt::ExperimentConfig& cfg,
                    const std::string& command, const json& extra) {
  const json echo = adapt::config_echo(cfg);
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = adapt::config_hash(echo);
  manifest["config_echo"] = echo;
  manifest["artifact_versions"] = {{"policy_format", 1}, {"csv_format", 1}};
  manifest["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  manifest["seed_table"] = seed_table(cfg);
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  const fs::path path = fs::path(cfg.output_dir) / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  out << manifest.dump(2) << "\n";
  log(LogLevel::kDebug, "wrote " + path.string());
}

void check_policy_matches(const adapt::Policy& policy,
                          const adapt::ExperimentConfig& cfg) {
  const adapt::EnvDynamics source = cfg.make_source();
  const int sdim = static_cast<int>(source.state_box.lower.size());
  const int adim = static_cast<int>(source.action_box.lower.size());
  const int expected_in =
      cfg.environment == adapt::EnvType::kCar ? sdim : 2 * sdim + 2;
  if (policy.env != cfg.environment || policy.net.output_dim != adim ||
      policy.net.input_dim != expected_in) {
    throw std::runtime_error("policy file does not match the configured environment");
  }
}

int cmd_train(const CommonFlags& flags) {
  const adapt::ExperimentConfig cfg = load_and_override(flags);
  const adapt::EnvDynamics source = cfg.make_source();
  const adapt::CostFunction cost = cfg.make_cost();
  const adapt::RestrictedSets sets = cfg.make_restricted_sets();

  log(LogLevel::kInfo, "training policy (" +
                           std::to_string(cfg.training.iterations) +
                           " CEM iterations)");
  const adapt::TrainResult result =
      adapt::train_policy(source, cost, sets, cfg.training);

  const fs::path policy_path =
      flags.policy_path.empty() ? fs::path(cfg.output_dir) / "policy.bin"
                                : fs::path(flags.policy_path);
  adapt::save_policy(policy_path.string(), result.policy);
  adapt::write_training_curve_csv(
      (fs::path(cfg.output_dir) / "training_curve.csv").string(), result);
  write_manifest(cfg, "train",
                 {{"policy_path", policy_path.string()},
                  {"final_best_cost", result.best_cost_curve.back()}});
  log(LogLevel::kInfo, "policy written to " + policy_path.string());
  return kExitOk;
}

int cmd_run(const CommonFlags& flags) {
  const adapt::ExperimentConfig cfg = load_and_override(flags);
  if (flags.policy_path.empty()) {
    std::cerr << "--policy is required for run\n";
    return kExitConfig;
  }
  adapt::Mode mode;
  if (flags.mode == "ideal") {
    mode = adapt::Mode::kIdeal;
  } else if (flags.mode == "naive") {
    mode = adapt::Mode::kNaive;
  } else if (flags.mode == "adapt") {
    mode = adapt::Mode::kAdapt;
  } else {
    std::cerr << "unknown mode: " << flags.mode << "\n";
    return kExitConfig;
  }

  adapt::Policy policy;
  try {
    policy = adapt::load_policy(flags.policy_path);
    check_policy_matches(policy, cfg);
  } catch (const std::exception& e) {
    std::cerr << "policy artifact error: " << e.what() << "\n";
    return kExitArtifact;
  }

  adapt::HarnessConfig harness = cfg.make_harness();
  harness.episodes = 1;
  const auto episodes = adapt::run_episode_batch(harness, policy, mode);
  const adapt::EpisodeResult& episode = episodes.front();

  const fs::path csv_path = fs::path(cfg.output_dir) / "episode.csv";
  adapt::write_episode_csv(csv_path.string(), episode);
  write_manifest(cfg, "run",
                 {{"mode", flags.mode},
                  {"diverged", episode.diverged},
                  {"final_normalized", episode.final_normalized()}});
  if (episode.diverged) {
    std::cerr << "episode diverged at step " << episode.diverged_step << "\n";
    return kExitDiverged;
  }
  log(LogLevel::kInfo,
      "final normalized cost " + adapt::format_float(episode.final_normalized()));
  return kExitOk;
}

int cmd_suite(const CommonFlags& flags) {
  const adapt::ExperimentConfig cfg = load_and_override(flags);
  if (flags.policy_path.empty()) {
    std::cerr << "--policy is required for suite\n";
    return kExitConfig;
  }
  adapt::Policy policy;
  try {
    policy = adapt::load_policy(flags.policy_path);
    check_policy_matches(policy, cfg);
  } catch (const std::exception& e) {
    std::cerr << "policy artifact error: " << e.what() << "\n";
    return kExitArtifact;
  }

  const adapt::HarnessConfig harness = cfg.make_harness();
  const adapt::SuiteResult suite = adapt::run_suite(harness, policy);

  adapt::write_summary_csv((fs::path(cfg.output_dir) / "summary.csv").string(),
                           suite.rows);
  std::vector<adapt::VerificationRow> rows;
  for (const adapt::VerificationAggregate& agg : suite.verification) {
    rows.push_back({agg.name, agg.pass_rate(), agg.worst_slack, agg.episodes});
  }
  adapt::write_verification_csv(
      (fs::path(cfg.output_dir) / "verification.csv").string(), rows);
  write_manifest(cfg, "suite",
                 {{"failure_count", suite.diverged},
                  {"verification_pass_rate", suite.verification_pass_rate}});
  for (const adapt::SuiteRow& row : suite.rows) {
    log(LogLevel::kInfo, std::string(adapt::mode_name(row.mode)) + " " +
                             row.disturbance + ": mean normalized " +
                             adapt::format_float(row.mean_normalized));
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags) {
  const adapt::ExperimentConfig cfg = load_and_override(flags);
  if (flags.policy_path.empty()) {
    std::cerr << "--policy is required for sweep\n";
    return kExitConfig;
  }
  adapt::Policy policy;
  try {
    policy = adapt::load_policy(flags.policy_path);
    check_policy_matches(policy, cfg);
  } catch (const std::exception& e) {
    std::cerr << "policy artifact error: " << e.what() << "\n";
    return kExitArtifact;
  }

  const adapt::HarnessConfig harness = cfg.make_harness();
  const adapt::SweepResult sweep = adapt::disturbance_sweep(
      harness, policy, cfg.sweep_control_scales, cfg.sweep_gammas);
  adapt::write_sweep_csv((fs::path(cfg.output_dir) / "sweep.csv").string(),
                         sweep);
  int diverged = 0;
  for (const adapt::SweepCell& cell : sweep.cells) diverged += cell.diverged;
  write_manifest(cfg, "sweep", {{"failure_count", diverged}});
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_mode) {
  cmd->add_option("--config", flags.config_path, "configuration file (JSON)")
      ->required();
  cmd->add_option("--out", flags.out, "output directory override");
  cmd->add_option("--policy", flags.policy_path, "policy file path");
  if (with_mode) {
    cmd->add_option("--mode", flags.mode, "ideal | naive | adapt");
  }
  cmd->add_option("--seed", flags.seed, "master seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--jobs", flags.jobs, "worker threads (default: all cores)");
  cmd->add_option("--episodes", flags.episodes, "episode count override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot policy transfer: training, tracking MPC, experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  int (*handler)(const CommonFlags&) = nullptr;

  CLI::App* train = app.add_subcommand("train", "train a policy on the source");
  add_common(train, flags, false);
  train->callback([&] { handler = cmd_train; });

  CLI::App* run = app.add_subcommand("run", "run a single episode");
  add_common(run, flags, true);
  run->callback([&] { handler = cmd_run; });

  CLI::App* suite = app.add_subcommand(
      "suite", "paired naive/adapt comparison per disturbance");
  add_common(suite, flags, false);
  suite->callback([&] { handler = cmd_suite; });

  CLI::App* sweep =
      app.add_subcommand("sweep", "control-noise x parameter-scale grid");
  add_common(sweep, flags, false);
  sweep->callback([&] { handler = cmd_sweep; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return handler(flags);
  } catch (const adapt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
