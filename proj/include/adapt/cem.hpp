#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "adapt/types.hpp"

namespace adapt {

struct CemOptions {
  int population = 48;
  double elite_fraction = 0.125;
  int iterations = 60;
  double init_std = 0.5;
  double std_floor = 1e-3;
  uint64_t seed = 0;
  int jobs = 1;
};

struct CemResult {
  Vector best;
  double best_cost = 0.0;
  std::vector<double> best_cost_curve;
  std::vector<double> elite_mean_curve;
};

/// Diagonal-Gaussian cross-entropy minimization. The objective must be a
/// deterministic function of its argument; +inf marks infeasible candidates.
CemResult cem_minimize(int dim, const std::function<double(const Vector&)>& objective,
                       const CemOptions& opts);

}  // namespace adapt
