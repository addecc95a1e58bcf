#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adapt/approx_model.hpp"
#include "adapt/policy.hpp"

using namespace adapt;

namespace {

Vector make_vec(std::initializer_list<double> v) {
  Vector s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

// Scalar linear plant s' = 0.9 s + 0.1 a with a wide action box.
StepFn linear_plant() {
  return [](const Vector& s, const Vector& a) {
    Vector next(1);
    next[0] = 0.9 * s[0] + 0.1 * a[0];
    return next;
  };
}

Trajectory linear_nominal(int steps) {
  Trajectory traj;
  traj.dt = 0.1;
  const StepFn step = linear_plant();
  Vector s = make_vec({2.0});
  traj.states.push_back(s);
  for (int t = 0; t < steps; ++t) {
    Vector a = make_vec({t % 2 == 0 ? 3.0 : -3.0});
    s = step(s, a);
    traj.actions.push_back(a);
    traj.states.push_back(s);
  }
  return traj;
}

BoxSpace wide_box(int dim) {
  return BoxSpace(Vector::Constant(dim, -100.0), Vector::Constant(dim, 100.0));
}

}  // namespace

TEST_CASE("tv-linear fit recovers an exactly linear system") {
  const Trajectory nominal = linear_nominal(12);
  TvFitConfig cfg;
  // Least squares is exact on noiseless linear data once the ridge bias is
  // negligible; widen the excitation and drop the ridge for the exactness
  // check.
  cfg.perturbation = 1.0;
  cfg.ridge = 1e-12;
  const TvLinearModel model =
      fit_tv_linear(linear_plant(), wide_box(1), nominal, cfg, 77);

  // At t=0 every rollout shares the same state, so A_0 is not identifiable
  // from action-perturbed data; recovery is checked from t=1 on.
  for (int t = 1; t < model.horizon(); ++t) {
    CHECK(std::abs(model.steps()[t].A(0, 0) - 0.9) < 1e-8);
    CHECK(std::abs(model.steps()[t].B(0, 0) - 0.1) < 1e-8);
    CHECK(std::abs(model.steps()[t].c[0]) < 1e-7);
  }
  CHECK(model.meta().fit_residual_median < 1e-9);
  CHECK(model.meta().holdout_error_median < 1e-9);
}

TEST_CASE("tv-linear fit is deterministic in the seed") {
  const Trajectory nominal = linear_nominal(8);
  TvFitConfig cfg;
  const TvLinearModel m1 =
      fit_tv_linear(linear_plant(), wide_box(1), nominal, cfg, 5);
  const TvLinearModel m2 =
      fit_tv_linear(linear_plant(), wide_box(1), nominal, cfg, 5);
  for (int t = 0; t < m1.horizon(); ++t) {
    CHECK(m1.steps()[t].A == m2.steps()[t].A);
    CHECK(m1.steps()[t].B == m2.steps()[t].B);
    CHECK(m1.steps()[t].c == m2.steps()[t].c);
  }
}

TEST_CASE("tv-linear linearize_at ignores the query point") {
  const Trajectory nominal = linear_nominal(6);
  const TvLinearModel model =
      fit_tv_linear(linear_plant(), wide_box(1), nominal, TvFitConfig{}, 3);
  const LinearizedStep l1 = model.linearize_at(make_vec({0.0}), make_vec({0.0}), 2);
  const LinearizedStep l2 = model.linearize_at(make_vec({5.0}), make_vec({-3.0}), 2);
  CHECK(l1.A == l2.A);
  CHECK(l1.B == l2.B);
  CHECK(l1.c == l2.c);
  CHECK_THROWS_AS(model.linearize_at(make_vec({0.0}), make_vec({0.0}), 6),
                  std::out_of_range);
  CHECK_THROWS_AS(model.predict(make_vec({0.0}), make_vec({0.0}), -1),
                  std::out_of_range);
}

TEST_CASE("tv-linear fit is the least-squares optimum") {
  // Mildly nonlinear plant so residuals are nonzero; perturbing the
  // recovered coefficients must never decrease the fitting objective.
  const StepFn plant = [](const Vector& s, const Vector& a) {
    Vector next(1);
    next[0] = 0.8 * s[0] + 0.2 * a[0] + 0.05 * std::sin(s[0]);
    return next;
  };
  Trajectory nominal;
  nominal.dt = 0.1;
  Vector s = make_vec({1.0});
  nominal.states.push_back(s);
  for (int t = 0; t < 6; ++t) {
    const Vector a = make_vec({1.0});
    s = plant(s, a);
    nominal.actions.push_back(a);
    nominal.states.push_back(s);
  }
  TvFitConfig cfg;
  cfg.ridge = 1e-12;
  const uint64_t seed = 9;
  const TvLinearModel model = fit_tv_linear(plant, wide_box(1), nominal, cfg, seed);

  // Rebuild the exact training rollouts the fitter drew (same seed, same
  // draw order: rollout, then step, then action dimension).
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Trajectory> data;
  for (int m = 0; m < cfg.rollouts; ++m) {
    Trajectory traj;
    traj.dt = 0.1;
    Vector x = nominal.states.front();
    traj.states.push_back(x);
    for (int t = 0; t < 6; ++t) {
      Vector a = nominal.actions[t];
      a[0] += cfg.perturbation * gauss(rng);
      x = plant(x, a);
      traj.actions.push_back(a);
      traj.states.push_back(x);
    }
    data.push_back(traj);
  }

  auto objective = [&](double da, double db, double dc, int t) {
    double sum = 0.0;
    for (const Trajectory& traj : data) {
      const double pred = (model.steps()[t].A(0, 0) + da) * traj.states[t][0] +
                          (model.steps()[t].B(0, 0) + db) * traj.actions[t][0] +
                          model.steps()[t].c[0] + dc;
      const double err = pred - traj.states[t + 1][0];
      sum += err * err;
    }
    return sum;
  };
  // Sanity: the reconstructed data is the fitting data (residual matches).
  CHECK(objective(0, 0, 0, 3) / cfg.rollouts < 1e-6);

  std::mt19937_64 probe_rng(123);
  for (int t = 1; t < 6; ++t) {
    const double base = objective(0, 0, 0, t);
    for (int k = 0; k < 20; ++k) {
      const double da = 1e-2 * gauss(probe_rng);
      const double db = 1e-2 * gauss(probe_rng);
      const double dc = 1e-2 * gauss(probe_rng);
      CHECK(objective(da, db, dc, t) >= base - 1e-9);
    }
  }
}

TEST_CASE("analytic model predicts the source exactly and linearizes locally") {
  const EnvDynamics car = make_car_env();
  const AnalyticModel model(car);
  const Vector s = make_vec({1.0, -0.5, 0.4, 1.1, 0.05});
  const Vector a = make_vec({0.6, -0.2});
  CHECK(model.predict(s, a, 0) == car.step(s, a));

  const LinearizedStep lin = model.linearize_at(s, a, 0);
  // Affine residual closes the linearization at the expansion point.
  CHECK((lin.A * s + lin.B * a + lin.c - model.predict(s, a, 0)).norm() < 1e-12);

  // First-order hold agrees with rk4 to O(dt^2) near the point.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vector ds(5), da(2);
    for (int i = 0; i < 5; ++i) ds[i] = 1e-2 * g(rng);
    for (int i = 0; i < 2; ++i) da[i] = 1e-2 * g(rng);
    const Vector pred = lin.A * (s + ds) + lin.B * (a + da) + lin.c;
    CHECK((pred - car.step(s + ds, a + da)).norm() < 1e-3);
  }
}

TEST_CASE("probe_model_error of a model against itself is zero") {
  const EnvDynamics car = make_car_env();
  const AnalyticModel model(car);
  const RestrictedSets sets = bound_set(car.state_box, car.action_box, 0.0);
  Policy policy = make_policy(EnvType::kCar, sets);
  const Trajectory nominal =
      rollout_nominal(policy, car, make_vec({1, 1, 0, 0, 0}), 10);
  std::mt19937_64 rng(5);
  const ModelErrorBound bound =
      probe_model_error(model, car, nominal, 0.1, 0.1, 500, rng);
  CHECK(bound.max_norm == doctest::Approx(0.0));
  CHECK(bound.lower.norm() == doctest::Approx(0.0));
  CHECK(bound.upper.norm() == doctest::Approx(0.0));
  CHECK(bound.samples == 500);
}

TEST_CASE("probe_model_error boxes every sampled residual") {
  const EnvDynamics car = make_car_env();
  // Deliberately biased model: Euler instead of rk4.
  class EulerModel : public ApproxModel {
   public:
    explicit EulerModel(EnvDynamics dyn) : dyn_(std::move(dyn)) {}
    Vector predict(const Vector& s, const Vector& a, int) const override {
      return s + dyn_.dt * dyn_.derivative(s, a);
    }
    LinearizedStep linearize_at(const Vector& s, const Vector& a,
                                int t) const override {
      Matrix ac, bc;
      dyn_.jacobians(s, a, ac, bc);
      LinearizedStep lin = discretize_jacobians(ac, bc, dyn_.dt);
      lin.c = predict(s, a, t) - lin.A * s - lin.B * a;
      return lin;
    }
    int horizon() const override { return 0; }

   private:
    EnvDynamics dyn_;
  };
  const EulerModel model(car);
  const RestrictedSets sets = bound_set(car.state_box, car.action_box, 0.0);
  Policy policy = make_policy(EnvType::kCar, sets);
  const Trajectory nominal =
      rollout_nominal(policy, car, make_vec({2, -1, 0.3, 0, 0}), 10);
  std::mt19937_64 rng(6);
  const ModelErrorBound bound =
      probe_model_error(model, car, nominal, 0.2, 0.2, 400, rng);
  CHECK(bound.max_norm > 0.0);
  CHECK((bound.lower.array() <= 0.0).all());
  CHECK((bound.upper.array() >= 0.0).all());
}

TEST_CASE("fit rejects too few rollouts") {
  const Trajectory nominal = linear_nominal(4);
  TvFitConfig cfg;
  cfg.rollouts = 2;
  CHECK_THROWS_AS(fit_tv_linear(linear_plant(), wide_box(1), nominal, cfg, 1),
                  std::invalid_argument);
}
