#include "adapt/approx_model.hpp"

#include <algorithm>
#include <cmath>

namespace adapt {

LinearizedStep AnalyticModel::linearize_at(const Vector& s, const Vector& a,
                                           int t) const {
  Matrix ac, bc;
  dyn_.jacobians(s, a, ac, bc);
  LinearizedStep step = discretize_jacobians(ac, bc, dyn_.dt);
  step.c = predict(s, a, t) - step.A * s - step.B * a;
  return step;
}

Vector TvLinearModel::predict(const Vector& s, const Vector& a, int t) const {
  if (t < 0 || t >= horizon()) {
    throw std::out_of_range("TvLinearModel::predict: t out of range");
  }
  const LinearizedStep& st = steps_[t];
  return st.A * s + st.B * a + st.c;
}

LinearizedStep TvLinearModel::linearize_at(const Vector&, const Vector&,
                                           int t) const {
  if (t < 0 || t >= horizon()) {
    throw std::out_of_range("TvLinearModel::linearize_at: t out of range");
  }
  return steps_[t];
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

std::vector<Trajectory> perturbed_rollouts(const StepFn& step,
                                           const BoxSpace& action_box,
                                           const Trajectory& nominal,
                                           int count, double perturbation,
                                           std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Trajectory> rollouts;
  rollouts.reserve(count);
  const int steps = nominal.horizon();
  for (int m = 0; m < count; ++m) {
    Trajectory traj;
    traj.dt = nominal.dt;
    traj.states.push_back(nominal.states.front());
    Vector s = nominal.states.front();
    for (int t = 0; t < steps; ++t) {
      Vector a = nominal.actions[t];
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        a[i] += perturbation * gauss(rng);
      }
      a = action_box.clamp(a);
      s = step(s, a);
      traj.actions.push_back(a);
      traj.states.push_back(s);
    }
    rollouts.push_back(std::move(traj));
  }
  return rollouts;
}

}  // namespace

TvLinearModel fit_tv_linear(const EnvDynamics& source,
                            const Trajectory& nominal, const TvFitConfig& cfg,
                            uint64_t seed) {
  return fit_tv_linear(
      [&source](const Vector& s, const Vector& a) { return source.step(s, a); },
      source.action_box, nominal, cfg, seed);
}

TvLinearModel fit_tv_linear(const StepFn& step, const BoxSpace& action_box,
                            const Trajectory& nominal, const TvFitConfig& cfg,
                            uint64_t seed) {
  const int steps = nominal.horizon();
  const int n = static_cast<int>(nominal.states.front().size());
  const int m = static_cast<int>(nominal.actions.front().size());
  const int p = n + m + 1;
  if (cfg.rollouts < p) {
    throw std::invalid_argument("fit_tv_linear: too few rollouts");
  }

  std::mt19937_64 rng(seed);
  const auto train = perturbed_rollouts(step, action_box, nominal,
                                        cfg.rollouts, cfg.perturbation, rng);
  const auto holdout = perturbed_rollouts(
      step, action_box, nominal, cfg.holdout_rollouts, cfg.perturbation, rng);

  TvFitMeta meta;
  meta.rollouts = cfg.rollouts;
  meta.perturbation = cfg.perturbation;
  meta.ridge_used = cfg.ridge;

  std::vector<LinearizedStep> model_steps(steps);
  std::vector<double> residuals;
  std::vector<double> holdout_errors;

  for (int t = 0; t < steps; ++t) {
    Matrix x(cfg.rollouts, p);
    Matrix y(cfg.rollouts, n);
    for (int r = 0; r < cfg.rollouts; ++r) {
      x.row(r).head(n) = train[r].states[t].transpose();
      x.row(r).segment(n, m) = train[r].actions[t].transpose();
      x(r, p - 1) = 1.0;
      y.row(r) = train[r].states[t + 1].transpose();
    }
    const Matrix xtx = x.transpose() * x;
    const Matrix xty = x.transpose() * y;

    double lambda = cfg.ridge;
    Matrix theta;  // p x n
    for (int attempt = 0;; ++attempt) {
      Matrix reg = xtx + lambda * Matrix::Identity(p, p);
      Eigen::LDLT<Matrix> ldlt(reg);
      theta = ldlt.solve(xty);
      const double rcond =
          ldlt.vectorD().minCoeff() / std::max(ldlt.vectorD().maxCoeff(), 1e-300);
      if (rcond > 1e-14 || attempt >= 6) break;
      lambda *= 10.0;
      meta.ridge_bumped = true;
      meta.ridge_used = std::max(meta.ridge_used, lambda);
    }

    LinearizedStep fitted;
    fitted.A = theta.topRows(n).transpose();
    fitted.B = theta.middleRows(n, m).transpose();
    fitted.c = theta.row(p - 1).transpose();
    if (!fitted.A.allFinite() || !fitted.B.allFinite() || !fitted.c.allFinite()) {
      throw std::runtime_error("fit_tv_linear: non-finite fit at t=" +
                               std::to_string(t));
    }
    residuals.push_back(
        std::sqrt((x * theta - y).squaredNorm() / cfg.rollouts));
    model_steps[t] = std::move(fitted);
  }

  TvLinearModel model(std::move(model_steps), meta);
  for (const Trajectory& traj : holdout) {
    for (int t = 0; t < steps; ++t) {
      holdout_errors.push_back(
          (model.predict(traj.states[t], traj.actions[t], t) -
           traj.states[t + 1])
              .norm());
    }
  }
  TvFitMeta final_meta = model.meta();
  final_meta.fit_residual_median = median(residuals);
  final_meta.holdout_error_median = median(holdout_errors);
  return TvLinearModel(std::vector<LinearizedStep>(model.steps()), final_meta);
}

ModelErrorBound probe_model_error(const ApproxModel& model,
                                  const EnvDynamics& source,
                                  const Trajectory& nominal,
                                  double state_radius, double action_radius,
                                  int sample_count, std::mt19937_64& rng) {
  const int n = source.state_dim();
  ModelErrorBound bound;
  bound.lower = Vector::Zero(n);
  bound.upper = Vector::Zero(n);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> pick_t(0, nominal.horizon() - 1);
  for (int k = 0; k < sample_count; ++k) {
    const int t = pick_t(rng);
    Vector s = nominal.states[t];
    Vector a = nominal.actions[t];
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] += state_radius * unit(rng);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += action_radius * unit(rng);
    a = source.action_box.clamp(a);
    const Vector residual = source.step(s, a) - model.predict(s, a, t);
    bound.lower = bound.lower.cwiseMin(residual);
    bound.upper = bound.upper.cwiseMax(residual);
    bound.max_norm = std::max(bound.max_norm, residual.norm());
    ++bound.samples;
  }
  return bound;
}

}  // namespace adapt
