#include "adapt/config.hpp"

#include <fstream>
#include <set>

#include "adapt/io.hpp"

namespace adapt {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, const std::string& path,
                        const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (known.find(key) == known.end()) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const std::string& key,
         T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "wrong type");
  }
}

Vector get_vector(const json& obj, const std::string& path,
                  const std::string& key, const Vector& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw ConfigError(path + "." + key, "expected array");
  Vector v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(path + "." + key, "expected numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

UniformNoise default_control_noise(EnvType env) {
  UniformNoise n;
  if (env == EnvType::kCar) {
    n.lower = Vector(2);
    n.upper = Vector(2);
    n.lower << 0.05, 0.01;
    n.upper << 0.25, 0.06;
  } else {
    n.lower = Vector(2);
    n.upper = Vector(2);
    n.lower << -0.012, -0.004;
    n.upper << -0.002, -0.0005;
  }
  return n;
}

UniformNoise default_process_noise(EnvType env) {
  UniformNoise n;
  if (env == EnvType::kCar) {
    n.lower = Vector::Constant(kCarStateDim, -0.01);
    n.upper = Vector::Constant(kCarStateDim, 0.01);
  } else {
    // Joint-velocity push; torque-level feedback can reject it, so tracking
    // quality (not raw authority) decides the naive-vs-adapt comparison.
    n.lower = Vector(kArmStateDim);
    n.upper = Vector(kArmStateDim);
    n.lower << 0.0, 0.0, 0.01, 0.01;
    n.upper << 0.0, 0.0, 0.08, 0.08;
  }
  return n;
}

}  // namespace

EnvDynamics ExperimentConfig::make_source() const {
  return environment == EnvType::kCar ? make_car_env(dt) : make_arm_env(dt, arm);
}

CostFunction ExperimentConfig::make_cost() const {
  CostFunction cost;
  cost.env = environment;
  cost.arm_goal = arm_goal;
  cost.arm_params = arm;
  cost.arm_torque_weight = arm_torque_weight;
  return cost;
}

RestrictedSets ExperimentConfig::make_restricted_sets() const {
  const EnvDynamics source = make_source();
  return bound_set(source.state_box, source.action_box, restricted_margin);
}

HarnessConfig ExperimentConfig::make_harness() const {
  HarnessConfig h;
  h.source = make_source();
  h.cost = make_cost();
  h.mpc = mpc;
  h.disturbances = disturbances;
  h.episode_steps = steps;
  h.episodes = episodes;
  h.master_seed = seed;
  h.jobs = jobs;
  h.use_tv_linear_model = model == ModelKind::kTvLinear;
  h.fit = fit;
  return h;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be an object");
  require_known_keys(doc, "",
                     {"environment", "dt", "steps", "episodes", "seed", "jobs",
                      "output_dir", "arm", "training", "model", "mpc",
                      "disturbances", "sweep", "trend"});

  ExperimentConfig cfg;
  if (!doc.contains("environment")) {
    throw ConfigError("environment", "required field missing");
  }
  const std::string env = doc.at("environment").get<std::string>();
  if (env == "car") {
    cfg.environment = EnvType::kCar;
    cfg.dt = 0.1;
    cfg.steps = 100;
  } else if (env == "arm") {
    cfg.environment = EnvType::kArm;
    cfg.dt = 0.02;
    cfg.steps = 50;
  } else {
    throw ConfigError("environment", "must be 'car' or 'arm'");
  }

  cfg.dt = get_or(doc, "", "dt", cfg.dt);
  if (cfg.dt <= 0.0) throw ConfigError("dt", "must be positive");
  cfg.steps = get_or(doc, "", "steps", cfg.steps);
  if (cfg.steps < 1) throw ConfigError("steps", "must be >= 1");
  cfg.episodes = get_or(doc, "", "episodes", cfg.episodes);
  if (cfg.episodes < 1) throw ConfigError("episodes", "must be >= 1");
  cfg.seed = get_or<uint64_t>(doc, "", "seed", cfg.seed);
  cfg.jobs = get_or(doc, "", "jobs", cfg.jobs);
  cfg.output_dir = get_or<std::string>(doc, "", "output_dir", cfg.output_dir);

  if (doc.contains("arm")) {
    const json& a = doc.at("arm");
    require_known_keys(a, "arm", {"m1", "m2", "l1", "l2", "damping", "goal",
                                  "torque_weight"});
    cfg.arm.m1 = get_or(a, "arm", "m1", cfg.arm.m1);
    cfg.arm.m2 = get_or(a, "arm", "m2", cfg.arm.m2);
    cfg.arm.l1 = get_or(a, "arm", "l1", cfg.arm.l1);
    cfg.arm.l2 = get_or(a, "arm", "l2", cfg.arm.l2);
    cfg.arm.damping = get_or(a, "arm", "damping", cfg.arm.damping);
    if (cfg.arm.m1 <= 0 || cfg.arm.m2 <= 0 || cfg.arm.l1 <= 0 || cfg.arm.l2 <= 0) {
      throw ConfigError("arm", "masses and lengths must be positive");
    }
    const Vector goal = get_vector(a, "arm", "goal",
                                   (Vector(2) << 0.1, 0.1).finished());
    if (goal.size() != 2) throw ConfigError("arm.goal", "expected 2 numbers");
    cfg.arm_goal = {goal[0], goal[1]};
    cfg.arm_torque_weight = get_or(a, "arm", "torque_weight", cfg.arm_torque_weight);
  }

  cfg.training.episode_steps = cfg.steps;
  cfg.training.seed = cfg.seed;
  if (doc.contains("training")) {
    const json& t = doc.at("training");
    require_known_keys(t, "training",
                       {"population", "elite_fraction", "iterations",
                        "rollouts_per_candidate", "init_std", "std_floor",
                        "randomization_mean", "randomization_std", "margin",
                        "seed"});
    cfg.training.population = get_or(t, "training", "population", cfg.training.population);
    cfg.training.elite_fraction =
        get_or(t, "training", "elite_fraction", cfg.training.elite_fraction);
    cfg.training.iterations = get_or(t, "training", "iterations", cfg.training.iterations);
    cfg.training.rollouts_per_candidate = get_or(
        t, "training", "rollouts_per_candidate", cfg.training.rollouts_per_candidate);
    cfg.training.init_std = get_or(t, "training", "init_std", cfg.training.init_std);
    cfg.training.std_floor = get_or(t, "training", "std_floor", cfg.training.std_floor);
    cfg.training.randomization.mean =
        get_or(t, "training", "randomization_mean", cfg.training.randomization.mean);
    cfg.training.randomization.std =
        get_or(t, "training", "randomization_std", cfg.training.randomization.std);
    cfg.training.seed = get_or<uint64_t>(t, "training", "seed", cfg.training.seed);
    cfg.restricted_margin = get_or(t, "training", "margin", cfg.restricted_margin);
    if (cfg.restricted_margin < 0.0 || cfg.restricted_margin >= 0.5) {
      throw ConfigError("training.margin", "must be in [0, 0.5)");
    }
  }
  cfg.training.jobs = cfg.jobs;

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    require_known_keys(m, "model", {"type", "rollouts", "holdout_rollouts",
                                    "perturbation", "ridge"});
    const std::string type = get_or<std::string>(m, "model", "type", "analytic");
    if (type == "analytic") {
      cfg.model = ModelKind::kAnalytic;
    } else if (type == "tv_linear") {
      cfg.model = ModelKind::kTvLinear;
    } else {
      throw ConfigError("model.type", "must be 'analytic' or 'tv_linear'");
    }
    cfg.fit.rollouts = get_or(m, "model", "rollouts", cfg.fit.rollouts);
    cfg.fit.holdout_rollouts =
        get_or(m, "model", "holdout_rollouts", cfg.fit.holdout_rollouts);
    cfg.fit.perturbation = get_or(m, "model", "perturbation", cfg.fit.perturbation);
    cfg.fit.ridge = get_or(m, "model", "ridge", cfg.fit.ridge);
  } else if (cfg.environment == EnvType::kArm) {
    cfg.model = ModelKind::kTvLinear;
  }

  cfg.mpc = cfg.environment == EnvType::kCar ? default_car_mpc_config()
                                             : default_arm_mpc_config();
  cfg.mpc.action_box = cfg.make_source().action_box;
  if (doc.contains("mpc")) {
    const json& m = doc.at("mpc");
    require_known_keys(m, "mpc", {"horizon", "q_diag", "r_diag",
                                  "max_iterations", "tolerance"});
    cfg.mpc.horizon = get_or(m, "mpc", "horizon", cfg.mpc.horizon);
    if (cfg.mpc.horizon < 1) throw ConfigError("mpc.horizon", "must be >= 1");
    cfg.mpc.q_diag = get_vector(m, "mpc", "q_diag", cfg.mpc.q_diag);
    cfg.mpc.r_diag = get_vector(m, "mpc", "r_diag", cfg.mpc.r_diag);
    cfg.mpc.max_iterations = get_or(m, "mpc", "max_iterations", cfg.mpc.max_iterations);
    cfg.mpc.tolerance = get_or(m, "mpc", "tolerance", cfg.mpc.tolerance);
    const int sdim = cfg.environment == EnvType::kCar ? kCarStateDim : kArmStateDim;
    const int adim = cfg.environment == EnvType::kCar ? kCarActionDim : kArmActionDim;
    if (cfg.mpc.q_diag.size() != sdim) throw ConfigError("mpc.q_diag", "wrong dimension");
    if (cfg.mpc.r_diag.size() != adim) throw ConfigError("mpc.r_diag", "wrong dimension");
    if ((cfg.mpc.q_diag.array() < 0).any()) {
      throw ConfigError("mpc.q_diag", "must be nonnegative");
    }
    if ((cfg.mpc.r_diag.array() <= 0).any()) {
      throw ConfigError("mpc.r_diag", "must be positive");
    }
  }

  if (doc.contains("disturbances")) {
    const json& d = doc.at("disturbances");
    require_known_keys(d, "disturbances",
                       {"hills", "control_noise", "process_noise", "gamma"});
    if (d.contains("hills")) {
      const json& h = d.at("hills");
      require_known_keys(h, "disturbances.hills",
                         {"enabled", "count", "radius_min", "radius_max",
                          "height_min", "height_max"});
      if (get_or(h, "disturbances.hills", "enabled", true)) {
        if (cfg.environment != EnvType::kCar) {
          throw ConfigError("disturbances.hills", "only valid for the car");
        }
        HillConfig hills;
        hills.count = get_or(h, "disturbances.hills", "count", hills.count);
        hills.radius_min = get_or(h, "disturbances.hills", "radius_min", hills.radius_min);
        hills.radius_max = get_or(h, "disturbances.hills", "radius_max", hills.radius_max);
        hills.height_min = get_or(h, "disturbances.hills", "height_min", hills.height_min);
        hills.height_max = get_or(h, "disturbances.hills", "height_max", hills.height_max);
        if (hills.count < 1 || hills.radius_min <= 0 ||
            hills.radius_max < hills.radius_min || hills.height_min < 0 ||
            hills.height_max < hills.height_min) {
          throw ConfigError("disturbances.hills", "invalid geometry ranges");
        }
        cfg.disturbances.hills = hills;
      }
    }
    auto parse_noise = [&](const char* key, EnvType env,
                           UniformNoise fallback) -> std::optional<UniformNoise> {
      if (!d.contains(key)) return std::nullopt;
      const json& n = d.at(key);
      const std::string path = std::string("disturbances.") + key;
      require_known_keys(n, path, {"enabled", "lower", "upper"});
      if (!get_or(n, path, "enabled", true)) return std::nullopt;
      UniformNoise noise;
      noise.lower = get_vector(n, path, "lower", fallback.lower);
      noise.upper = get_vector(n, path, "upper", fallback.upper);
      if (noise.lower.size() != noise.upper.size() ||
          (noise.lower.array() > noise.upper.array()).any()) {
        throw ConfigError(path, "lower must not exceed upper");
      }
      return noise;
    };
    cfg.disturbances.control_noise = parse_noise(
        "control_noise", cfg.environment, default_control_noise(cfg.environment));
    if (cfg.disturbances.control_noise.has_value() &&
        cfg.disturbances.control_noise->lower.size() !=
            (cfg.environment == EnvType::kCar ? kCarActionDim : kArmActionDim)) {
      throw ConfigError("disturbances.control_noise", "wrong dimension");
    }
    cfg.disturbances.process_noise = parse_noise(
        "process_noise", cfg.environment, default_process_noise(cfg.environment));
    if (cfg.disturbances.process_noise.has_value() &&
        cfg.disturbances.process_noise->lower.size() !=
            (cfg.environment == EnvType::kCar ? kCarStateDim : kArmStateDim)) {
      throw ConfigError("disturbances.process_noise", "wrong dimension");
    }
    cfg.disturbances.gamma = get_or(d, "disturbances", "gamma", 1.0);
    if (cfg.disturbances.gamma <= 0.0) {
      throw ConfigError("disturbances.gamma", "must be positive");
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    require_known_keys(s, "sweep", {"control_scales", "gammas"});
    const Vector cs = get_vector(s, "sweep", "control_scales", Vector());
    const Vector gs = get_vector(s, "sweep", "gammas", Vector());
    if (cs.size() > 0) {
      cfg.sweep_control_scales.assign(cs.data(), cs.data() + cs.size());
    }
    if (gs.size() > 0) {
      cfg.sweep_gammas.assign(gs.data(), gs.data() + gs.size());
    }
  }
  if (doc.contains("trend")) {
    const json& t = doc.at("trend");
    require_known_keys(t, "trend", {"scales"});
    const Vector ts = get_vector(t, "trend", "scales", Vector());
    if (ts.size() > 0) {
      cfg.trend_scales.assign(ts.data(), ts.data() + ts.size());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, "cannot open config file");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path, std::string("parse error: ") + e.what());
  }
  return parse_config(doc);
}

json config_echo(const ExperimentConfig& cfg) {
  json doc;
  doc["environment"] = cfg.environment == EnvType::kCar ? "car" : "arm";
  doc["dt"] = cfg.dt;
  doc["steps"] = cfg.steps;
  doc["episodes"] = cfg.episodes;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  doc["output_dir"] = cfg.output_dir;
  doc["arm"] = {{"m1", cfg.arm.m1},
                {"m2", cfg.arm.m2},
                {"l1", cfg.arm.l1},
                {"l2", cfg.arm.l2},
                {"damping", cfg.arm.damping},
                {"goal", {cfg.arm_goal[0], cfg.arm_goal[1]}},
                {"torque_weight", cfg.arm_torque_weight}};
  doc["training"] = {
      {"population", cfg.training.population},
      {"elite_fraction", cfg.training.elite_fraction},
      {"iterations", cfg.training.iterations},
      {"rollouts_per_candidate", cfg.training.rollouts_per_candidate},
      {"init_std", cfg.training.init_std},
      {"std_floor", cfg.training.std_floor},
      {"randomization_mean", cfg.training.randomization.mean},
      {"randomization_std", cfg.training.randomization.std},
      {"margin", cfg.restricted_margin},
      {"seed", cfg.training.seed}};
  doc["model"] = {{"type", cfg.model == ModelKind::kAnalytic ? "analytic"
                                                             : "tv_linear"},
                  {"rollouts", cfg.fit.rollouts},
                  {"holdout_rollouts", cfg.fit.holdout_rollouts},
                  {"perturbation", cfg.fit.perturbation},
                  {"ridge", cfg.fit.ridge}};
  doc["mpc"] = {{"horizon", cfg.mpc.horizon},
                {"q_diag", vector_to_json(cfg.mpc.q_diag)},
                {"r_diag", vector_to_json(cfg.mpc.r_diag)},
                {"max_iterations", cfg.mpc.max_iterations},
                {"tolerance", cfg.mpc.tolerance}};
  json dist;
  if (cfg.disturbances.hills.has_value()) {
    const HillConfig& h = *cfg.disturbances.hills;
    dist["hills"] = {{"enabled", true},
                     {"count", h.count},
                     {"radius_min", h.radius_min},
                     {"radius_max", h.radius_max},
                     {"height_min", h.height_min},
                     {"height_max", h.height_max}};
  }
  if (cfg.disturbances.control_noise.has_value()) {
    dist["control_noise"] = {
        {"enabled", true},
        {"lower", vector_to_json(cfg.disturbances.control_noise->lower)},
        {"upper", vector_to_json(cfg.disturbances.control_noise->upper)}};
  }
  if (cfg.disturbances.process_noise.has_value()) {
    dist["process_noise"] = {
        {"enabled", true},
        {"lower", vector_to_json(cfg.disturbances.process_noise->lower)},
        {"upper", vector_to_json(cfg.disturbances.process_noise->upper)}};
  }
  dist["gamma"] = cfg.disturbances.gamma;
  doc["disturbances"] = dist;
  doc["sweep"] = {{"control_scales", cfg.sweep_control_scales},
                  {"gammas", cfg.sweep_gammas}};
  doc["trend"] = {{"scales", cfg.trend_scales}};
  return doc;
}

uint64_t config_hash(const json& echo) {
  const std::string dump = echo.dump();
  return fnv1a(dump.data(), dump.size());
}

}  // namespace adapt
