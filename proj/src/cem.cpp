#include "adapt/cem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "adapt/parallel.hpp"
#include "adapt/rng.hpp"

namespace adapt {

CemResult cem_minimize(int dim,
                       const std::function<double(const Vector&)>& objective,
                       const CemOptions& opts) {
  if (opts.population < 10) {
    throw std::invalid_argument("cem_minimize: population must be >= 10");
  }
  if (opts.elite_fraction <= 0.0 || opts.elite_fraction >= 1.0) {
    throw std::invalid_argument("cem_minimize: elite_fraction in (0,1)");
  }
  const int elite_count =
      std::max(2, static_cast<int>(opts.population * opts.elite_fraction));

  Vector mu = Vector::Zero(dim);
  Vector sigma = Vector::Constant(dim, opts.init_std);

  std::mt19937_64 sampler(derive_seed(opts.seed, 0x5EEDULL));
  std::normal_distribution<double> gauss(0.0, 1.0);

  CemResult result;
  result.best = mu;
  result.best_cost = std::numeric_limits<double>::infinity();

  std::vector<Vector> candidates(opts.population);
  std::vector<double> costs(opts.population);

  for (int iter = 0; iter < opts.iterations; ++iter) {
    for (int i = 0; i < opts.population; ++i) {
      Vector theta(dim);
      for (int d = 0; d < dim; ++d) {
        theta[d] = mu[d] + sigma[d] * gauss(sampler);
      }
      candidates[i] = std::move(theta);
    }
    parallel_for(opts.population, opts.jobs, [&](int i) {
      const double c = objective(candidates[i]);
      costs[i] = std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
    });

    std::vector<int> order(opts.population);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return costs[a] < costs[b]; });

    if (costs[order[0]] < result.best_cost) {
      result.best_cost = costs[order[0]];
      result.best = candidates[order[0]];
    }

    Vector new_mu = Vector::Zero(dim);
    double elite_sum = 0.0;
    for (int e = 0; e < elite_count; ++e) {
      new_mu += candidates[order[e]];
      elite_sum += costs[order[e]];
    }
    new_mu /= elite_count;
    Vector var = Vector::Zero(dim);
    for (int e = 0; e < elite_count; ++e) {
      var += (candidates[order[e]] - new_mu).cwiseAbs2();
    }
    // Decaying extra variance keeps the search alive until the mean has
    // travelled to the optimum; refitting to the elites alone collapses the
    // spread prematurely because elites cluster in the selected tail.
    const double extra = opts.init_std * opts.init_std *
                         std::max(0.0, 1.0 - 2.0 * iter / opts.iterations);
    sigma = (var / elite_count)
                .cwiseSqrt()
                .cwiseMax(std::sqrt(extra))
                .cwiseMax(opts.std_floor);
    mu = new_mu;

    result.best_cost_curve.push_back(result.best_cost);
    result.elite_mean_curve.push_back(
        std::isfinite(elite_sum) ? elite_sum / elite_count
                                 : std::numeric_limits<double>::infinity());
  }
  return result;
}

}  // namespace adapt
