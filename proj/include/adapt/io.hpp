#pragma once

#include <string>

#include "adapt/harness.hpp"
#include "adapt/policy.hpp"

namespace adapt {

/// Versioned flat binary policy document: magic + header (env, goal, arm
/// parameters, layer dims, action box) + row-major 64-bit weights,
/// little-endian, trailed by an FNV-1a checksum of everything before it.
void save_policy(const std::string& path, const Policy& policy);
Policy load_policy(const std::string& path);

std::string format_float(double v);  // decimal, 9 significant digits

void write_episode_csv(const std::string& path, const EpisodeResult& result);

void write_summary_csv(const std::string& path,
                       const std::vector<SuiteRow>& rows);

void write_sweep_csv(const std::string& path, const SweepResult& sweep);

struct VerificationRow {
  std::string check;
  double pass_rate = 0.0;
  double worst_slack = 0.0;
  int episodes = 0;
};

void write_verification_csv(const std::string& path,
                            const std::vector<VerificationRow>& rows);

void write_training_curve_csv(const std::string& path,
                              const TrainResult& result);

void write_trend_csv(const std::string& path, const ScalingTrend& trend);

uint64_t fnv1a(const void* data, size_t size, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace adapt
