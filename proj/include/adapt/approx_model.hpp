#pragma once

#include <memory>
#include <random>

#include "adapt/dynamics.hpp"
#include "adapt/types.hpp"

namespace adapt {

/// Approximate dynamics f-hat used by the auxiliary controller. Implementors
/// provide a one-step prediction and an affine linearization at any point;
/// the residual satisfies predict(s,a,t) == A s + B a + c at the
/// linearization point.
class ApproxModel {
 public:
  virtual ~ApproxModel() = default;
  virtual Vector predict(const Vector& s, const Vector& a, int t) const = 0;
  virtual LinearizedStep linearize_at(const Vector& s, const Vector& a,
                                      int t) const = 0;
  virtual int horizon() const = 0;  // number of valid timesteps, 0 = any
};

/// Analytic model: RK4 step of the declared derivative, first-order-hold
/// discretized Jacobians.
class AnalyticModel : public ApproxModel {
 public:
  explicit AnalyticModel(EnvDynamics dyn) : dyn_(std::move(dyn)) {}

  Vector predict(const Vector& s, const Vector& a, int) const override {
    return dyn_.step(s, a);
  }

  LinearizedStep linearize_at(const Vector& s, const Vector& a,
                              int t) const override;

  int horizon() const override { return 0; }

  const EnvDynamics& dynamics() const { return dyn_; }

 private:
  EnvDynamics dyn_;
};

struct TvFitConfig {
  int rollouts = 50;
  int holdout_rollouts = 10;
  double perturbation = 0.05;  // Gaussian std on nominal actions
  double ridge = 1e-6;
};

struct TvFitMeta {
  int rollouts = 0;
  double perturbation = 0.0;
  double ridge_used = 0.0;
  bool ridge_bumped = false;
  double fit_residual_median = 0.0;
  double holdout_error_median = 0.0;
};

/// Per-timestep affine model s_{t+1} = A_t s_t + B_t a_t + c_t.
class TvLinearModel : public ApproxModel {
 public:
  TvLinearModel() = default;
  TvLinearModel(std::vector<LinearizedStep> steps, TvFitMeta meta)
      : steps_(std::move(steps)), meta_(meta) {}

  Vector predict(const Vector& s, const Vector& a, int t) const override;
  LinearizedStep linearize_at(const Vector& s, const Vector& a,
                              int t) const override;
  int horizon() const override { return static_cast<int>(steps_.size()); }

  const std::vector<LinearizedStep>& steps() const { return steps_; }
  const TvFitMeta& meta() const { return meta_; }

 private:
  std::vector<LinearizedStep> steps_;
  TvFitMeta meta_;
};

/// Ridge-regress per-timestep affine dynamics from perturbed rollouts of the
/// deterministic source around the nominal trajectory.
TvLinearModel fit_tv_linear(const EnvDynamics& source,
                            const Trajectory& nominal, const TvFitConfig& cfg,
                            uint64_t seed);

/// Same fit against an arbitrary deterministic step map (test hook for
/// exactly-linear systems and custom plants).
using StepFn = std::function<Vector(const Vector& s, const Vector& a)>;
TvLinearModel fit_tv_linear(const StepFn& step, const BoxSpace& action_box,
                            const Trajectory& nominal, const TvFitConfig& cfg,
                            uint64_t seed);

struct ModelErrorBound {
  Vector lower;  // per-dimension outer box of f - f_hat
  Vector upper;
  double max_norm = 0.0;
  int samples = 0;
};

/// Sample residuals f(s,a) - f_hat(s,a) over a tube around the nominal
/// trajectory. Diagnostic only.
ModelErrorBound probe_model_error(const ApproxModel& model,
                                  const EnvDynamics& source,
                                  const Trajectory& nominal,
                                  double state_radius, double action_radius,
                                  int sample_count, std::mt19937_64& rng);

}  // namespace adapt
