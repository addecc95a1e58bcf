#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adapt/disturbances.hpp"
#include "adapt/policy.hpp"

using namespace adapt;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vector make_state(std::initializer_list<double> v) {
  Vector s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}
}  // namespace

TEST_CASE("generate_hills is seeded and stays in the workspace") {
  const BoxSpace workspace = car_workspace();
  std::mt19937_64 rng1(42), rng2(42), rng3(43);
  const HillField f1 = generate_hills(rng1, workspace);
  const HillField f2 = generate_hills(rng2, workspace);
  const HillField f3 = generate_hills(rng3, workspace);

  REQUIRE(f1.hills.size() == 20);
  for (size_t i = 0; i < f1.hills.size(); ++i) {
    CHECK(f1.hills[i].center == f2.hills[i].center);
    CHECK(f1.hills[i].radius == f2.hills[i].radius);
    CHECK(f1.hills[i].height == f2.hills[i].height);
    CHECK(f1.hills[i].radius >= 0.5);
    CHECK(f1.hills[i].radius <= 2.0);
    CHECK(f1.hills[i].height >= 0.05);
    CHECK(f1.hills[i].height <= 0.3);
    Vector center(2);
    center << f1.hills[i].center.x(), f1.hills[i].center.y();
    CHECK(workspace.contains(center));
  }
  bool differs = false;
  for (size_t i = 0; i < f1.hills.size(); ++i) {
    if (f1.hills[i].center != f3.hills[i].center) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("hill_accel analytic oracle") {
  HillField field;
  field.hills.push_back({{0.0, 0.0}, 1.0, 0.2});

  // At the peak the gradient vanishes by symmetry.
  CHECK(hill_accel(field, make_state({0, 0, 0, 1, 0})) == doctest::Approx(0.0));
  // Outside every hill the landscape is flat.
  CHECK(hill_accel(field, make_state({3, 3, 0.7, 1, 0})) == doctest::Approx(0.0));

  // Bump profile h(d) = (height/2)(1 + cos(pi d / radius)); at (0.5, 0)
  // heading +x the slope is downhill, so the push is positive:
  // 9.81 * (0.2/2) * pi * sin(pi * 0.5) = 3.082.
  const double expected = 9.81 * 0.1 * kPi * std::sin(kPi * 0.5);
  CHECK(hill_accel(field, make_state({0.5, 0, 0, 1, 0})) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(3.082).epsilon(1e-3));

  // Heading reversed: climbing the same slope decelerates.
  CHECK(hill_accel(field, make_state({0.5, 0, kPi, 1, 0})) ==
        doctest::Approx(-expected).epsilon(1e-12));
}

TEST_CASE("hill acceleration field is continuous across the boundary") {
  HillField field;
  field.hills.push_back({{0.0, 0.0}, 1.0, 0.3});
  double prev = hill_accel(field, make_state({0.5, 0, 0, 1, 0}));
  for (double x = 0.5 + 1e-4; x <= 1.5; x += 1e-4) {
    const double cur = hill_accel(field, make_state({x, 0, 0, 1, 0}));
    CHECK(std::abs(cur - prev) < 1e-2);
    prev = cur;
  }
}

TEST_CASE("sample_noise stays in the box with the right mean") {
  UniformNoise noise;
  noise.lower = make_state({0.05, 0.01});
  noise.upper = make_state({0.25, 0.06});
  std::mt19937_64 rng(5);
  const int n = 100000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vector w = sample_noise(noise, rng);
    CHECK(w[0] >= 0.05);
    CHECK(w[0] <= 0.25);
    CHECK(w[1] >= 0.01);
    CHECK(w[1] <= 0.06);
    sum += w;
  }
  const Vector mean = sum / n;
  // Uniform on [a,b] has std (b-a)/sqrt(12); allow 3 standard errors.
  const double se0 = 0.2 / std::sqrt(12.0) / std::sqrt(double(n));
  const double se1 = 0.05 / std::sqrt(12.0) / std::sqrt(double(n));
  CHECK(std::abs(mean[0] - 0.15) < 3 * se0);
  CHECK(std::abs(mean[1] - 0.035) < 3 * se1);
}

TEST_CASE("symmetric process noise has zero mean") {
  UniformNoise noise;
  noise.lower = Vector::Constant(5, -0.01);
  noise.upper = Vector::Constant(5, 0.01);
  std::mt19937_64 rng(9);
  const int n = 100000;
  Vector sum = Vector::Zero(5);
  for (int i = 0; i < n; ++i) sum += sample_noise(noise, rng);
  const double se = 0.02 / std::sqrt(12.0) / std::sqrt(double(n));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(sum[i] / n) < 3 * se);
}

TEST_CASE("target step with no disturbances equals the source bit-exactly") {
  const EnvDynamics source = make_car_env();
  TargetEnv target(source, DisturbanceConfig{}, 123, 10);
  const Vector s = make_state({1, -2, 0.5, 1.2, 0.1});
  const Vector a = make_state({0.4, -0.1});
  for (int t = 0; t < 10; ++t) {
    CHECK(target.step(s, a, t) == source.step(s, a));
  }
}

TEST_CASE("gamma = 1 parameter scale is the identity") {
  const EnvDynamics source = make_car_env();
  DisturbanceConfig cfg;
  cfg.gamma = 1.0;
  TargetEnv target(source, cfg, 7, 5);
  const Vector s = make_state({0.3, 0.1, -0.2, 0.8, 0.05});
  const Vector a = make_state({-0.5, 0.2});
  CHECK(target.step(s, a, 2) == source.step(s, a));
}

TEST_CASE("process noise only adds the draw exactly") {
  const EnvDynamics source = make_car_env();
  DisturbanceConfig cfg;
  UniformNoise noise;
  noise.lower = Vector::Constant(5, -0.01);
  noise.upper = Vector::Constant(5, 0.01);
  cfg.process_noise = noise;
  TargetEnv target(source, cfg, 17, 5);
  const Vector s = make_state({1, 1, 0, 1, 0});
  const Vector a = make_state({0.2, 0.1});
  for (int t = 0; t < 5; ++t) {
    const Vector w = target.step(s, a, t) - source.step(s, a);
    CHECK((w.array().abs() <= 0.01 + 1e-15).all());
    // Same seed, fresh env: identical realization at the same step index.
    TargetEnv twin(source, cfg, 17, 5);
    CHECK(twin.step(s, a, t) == target.step(s, a, t));
  }
}

TEST_CASE("paired seeding gives identical streams across instances") {
  const EnvDynamics source = make_car_env();
  DisturbanceConfig cfg;
  UniformNoise ctrl;
  ctrl.lower = make_state({0.05, 0.01});
  ctrl.upper = make_state({0.25, 0.06});
  cfg.control_noise = ctrl;
  UniformNoise proc;
  proc.lower = Vector::Constant(5, -0.01);
  proc.upper = Vector::Constant(5, 0.01);
  cfg.process_noise = proc;
  cfg.hills = HillConfig{};
  TargetEnv a_env(source, cfg, 99, 20);
  TargetEnv b_env(source, cfg, 99, 20);
  TargetEnv c_env(source, cfg, 100, 20);
  const Vector s = make_state({2, -1, 0.3, 1.0, 0.0});
  const Vector a = make_state({0.1, 0.05});
  bool differs = false;
  for (int t = 0; t < 20; ++t) {
    CHECK(a_env.step(s, a, t) == b_env.step(s, a, t));
    if (a_env.step(s, a, t) != c_env.step(s, a, t)) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("naive rollout on an undisturbed target reproduces nominal") {
  const EnvDynamics source = make_car_env();
  TargetEnv target(source, DisturbanceConfig{}, 3, 30);
  Vector s = make_state({2, 3, 0.5, 0, 0});
  Vector s_src = s;
  const Vector a = make_state({0.5, -0.1});
  for (int t = 0; t < 30; ++t) {
    s = target.step(s, a, t);
    s_src = source.step(s_src, a);
    CHECK(s == s_src);
  }
}

TEST_CASE("support radius") {
  const EnvDynamics source = make_car_env();

  TargetEnv none(source, DisturbanceConfig{}, 1, 10);
  CHECK(none.support_radius() == doctest::Approx(0.0));

  DisturbanceConfig proc_cfg;
  UniformNoise proc;
  proc.lower = Vector::Constant(5, -0.01);
  proc.upper = Vector::Constant(5, 0.01);
  proc_cfg.process_noise = proc;
  TargetEnv proc_env(source, proc_cfg, 1, 10);
  CHECK(proc_env.support_radius() ==
        doctest::Approx(std::sqrt(5.0 * 1e-4)).epsilon(1e-9));
  CHECK(proc_env.support_radius() == doctest::Approx(0.02236).epsilon(1e-3));

  // Doubling a symmetric box at least doubles the estimate.
  DisturbanceConfig double_cfg = proc_cfg;
  double_cfg.process_noise->lower *= 2.0;
  double_cfg.process_noise->upper *= 2.0;
  TargetEnv double_env(source, double_cfg, 1, 10);
  CHECK(double_env.support_radius() >= 2.0 * proc_env.support_radius() - 1e-12);
}

TEST_CASE("arm target rejects hills") {
  const EnvDynamics arm = make_arm_env();
  DisturbanceConfig cfg;
  cfg.hills = HillConfig{};
  CHECK_THROWS_AS(TargetEnv(arm, cfg, 1, 5), std::invalid_argument);
}

TEST_CASE("arm gamma scales the link masses") {
  const EnvDynamics arm = make_arm_env();
  DisturbanceConfig cfg;
  cfg.gamma = 1.5;
  TargetEnv target(arm, cfg, 1, 5);
  CHECK(target.scaled().arm.m1 == doctest::Approx(1.5 * arm.arm.m1));
  CHECK(target.scaled().arm.m2 == doctest::Approx(1.5 * arm.arm.m2));
  // Heavier links accelerate less under the same torque.
  const Vector s = Vector::Zero(4);
  const Vector tau = make_state({0.05, 0.0});
  const Vector heavy = target.step(s, tau, 0);
  const Vector light = arm.step(s, tau);
  CHECK(std::abs(heavy[2]) < std::abs(light[2]));
}
