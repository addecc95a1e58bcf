#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "adapt/config.hpp"
#include "adapt/io.hpp"

using namespace adapt;
using nlohmann::json;

TEST_CASE("missing environment is a config error with the field path") {
  try {
    parse_config(json::object());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "environment");
  }
}

TEST_CASE("unknown keys are rejected at every level") {
  try {
    parse_config({{"environment", "car"}, {"typo_key", 1}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "typo_key");
  }
  try {
    parse_config({{"environment", "car"}, {"mpc", {{"horizn", 10}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "mpc.horizn");
  }
  try {
    parse_config({{"environment", "car"},
                  {"disturbances", {{"hills", {{"radius", 1}}}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "disturbances.hills.radius");
  }
}

TEST_CASE("invalid values carry their field path") {
  CHECK_THROWS_AS(parse_config({{"environment", "boat"}}), ConfigError);
  try {
    parse_config({{"environment", "car"}, {"dt", -0.1}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "dt");
  }
  try {
    parse_config({{"environment", "car"},
                  {"mpc",
                   {{"q_diag", {1.0, 1.0}}}}});  // wrong dimension for the car
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "mpc.q_diag");
  }
  try {
    parse_config({{"environment", "arm"},
                  {"disturbances", {{"hills", json::object()}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path() == "disturbances.hills");
  }
}

TEST_CASE("environment defaults are materialized") {
  const ExperimentConfig car = parse_config({{"environment", "car"}});
  CHECK(car.dt == doctest::Approx(0.1));
  CHECK(car.steps == 100);
  CHECK(car.episodes == 50);
  CHECK(car.model == ModelKind::kAnalytic);
  CHECK(car.mpc.horizon == 20);
  CHECK(car.mpc.q_diag.size() == 5);
  CHECK(car.mpc.q_diag[0] == 1.0);
  CHECK(car.mpc.q_diag[2] == 0.0);
  CHECK(car.mpc.r_diag[0] == doctest::Approx(1e-3));
  CHECK(!car.disturbances.any_active());

  const ExperimentConfig arm = parse_config({{"environment", "arm"}});
  CHECK(arm.dt == doctest::Approx(0.02));
  CHECK(arm.steps == 50);
  CHECK(arm.model == ModelKind::kTvLinear);
  CHECK(arm.arm_goal.x() == doctest::Approx(0.1));
  CHECK(arm.make_source().action_box.upper[0] == doctest::Approx(0.05));
}

TEST_CASE("disturbance defaults appear when the block is enabled") {
  const ExperimentConfig cfg = parse_config(
      {{"environment", "car"},
       {"disturbances",
        {{"hills", json::object()},
         {"control_noise", json::object()},
         {"process_noise", json::object()},
         {"gamma", 2.0}}}});
  REQUIRE(cfg.disturbances.control_noise.has_value());
  CHECK(cfg.disturbances.control_noise->lower[0] == doctest::Approx(0.05));
  CHECK(cfg.disturbances.control_noise->upper[1] == doctest::Approx(0.06));
  REQUIRE(cfg.disturbances.process_noise.has_value());
  CHECK(cfg.disturbances.process_noise->lower.size() == 5);
  CHECK(cfg.disturbances.process_noise->upper[4] == doctest::Approx(0.01));
  REQUIRE(cfg.disturbances.hills.has_value());
  CHECK(cfg.disturbances.hills->count == 20);
  CHECK(cfg.disturbances.gamma == 2.0);
  CHECK(suite_variants(cfg.disturbances).size() == 4);
}

TEST_CASE("config echo round-trips to an equal configuration") {
  const json doc = {{"environment", "car"},
                    {"seed", 42},
                    {"episodes", 7},
                    {"training", {{"population", 24}, {"iterations", 10}}},
                    {"disturbances",
                     {{"control_noise", json::object()}, {"gamma", 1.5}}}};
  const ExperimentConfig cfg = parse_config(doc);
  const json echo = config_echo(cfg);
  const ExperimentConfig round = parse_config(echo);
  CHECK(config_echo(round) == echo);
  CHECK(config_hash(echo) == config_hash(config_echo(round)));
  CHECK(round.seed == 42);
  CHECK(round.episodes == 7);
  CHECK(round.training.population == 24);
  CHECK(round.disturbances.gamma == 1.5);
  REQUIRE(round.disturbances.control_noise.has_value());
  CHECK(round.disturbances.control_noise->lower ==
        cfg.disturbances.control_noise->lower);

  // Different configs hash differently.
  json other = doc;
  other["seed"] = 43;
  CHECK(config_hash(config_echo(parse_config(other))) != config_hash(echo));
}

TEST_CASE("harness factory mirrors the configuration") {
  const ExperimentConfig cfg = parse_config(
      {{"environment", "arm"},
       {"seed", 3},
       {"disturbances", {{"process_noise", json::object()}}}});
  const HarnessConfig h = cfg.make_harness();
  CHECK(h.source.type == EnvType::kArm);
  CHECK(h.use_tv_linear_model);
  CHECK(h.master_seed == 3);
  CHECK(h.episode_steps == 50);
  CHECK(h.disturbances.process_noise.has_value());
}

TEST_CASE("policy files round-trip and detect corruption") {
  const EnvDynamics car = make_car_env();
  const RestrictedSets sets = bound_set(car.state_box, car.action_box, 0.0);
  Policy policy = make_policy(EnvType::kCar, sets);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < policy.net.theta.size(); ++i) {
    policy.net.theta[i] = g(rng);
  }

  const std::string path = "test_policy_roundtrip.bin";
  save_policy(path, policy);
  const Policy loaded = load_policy(path);
  CHECK(loaded.env == policy.env);
  CHECK(loaded.net.input_dim == policy.net.input_dim);
  CHECK(loaded.net.theta == policy.net.theta);
  CHECK(loaded.action_space.lower == policy.action_space.lower);

  // Saving twice produces byte-identical files.
  const std::string path2 = "test_policy_roundtrip2.bin";
  save_policy(path2, policy);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  f1.close();
  f2.close();

  // Flip one payload byte: checksum mismatch.
  b1[b1.size() / 2] = static_cast<char>(b1[b1.size() / 2] ^ 0x01);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(b1.data(), static_cast<std::streamsize>(b1.size()));
  out.close();
  try {
    load_policy(path);
    FAIL("expected checksum error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("checksum") != std::string::npos);
  }

  // Truncated file.
  std::ofstream trunc(path, std::ios::binary | std::ios::trunc);
  trunc.write(b2.data(), 16);
  trunc.close();
  CHECK_THROWS_AS(load_policy(path), std::runtime_error);

  CHECK_THROWS_AS(load_policy("does_not_exist.bin"), std::runtime_error);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("format_float uses nine significant digits") {
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(0.1) == "0.1");
  CHECK(format_float(1.0 / 3.0) == "0.333333333");
  CHECK(format_float(123456789.5) == "123456790");
}

TEST_CASE("load_config reports unreadable and malformed files") {
  CHECK_THROWS_AS(load_config("no_such_config.json"), ConfigError);
  const std::string path = "test_bad_config.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::ofstream(path) << R"({"environment": "car", "seed": 5})";
  const ExperimentConfig cfg = load_config(path);
  CHECK(cfg.seed == 5);
  std::remove(path.c_str());
}
