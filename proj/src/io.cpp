#include "adapt/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace adapt {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'P', 'T', 'P', 'O', 'L', '1'};

void put_bytes(std::string& buf, const void* data, size_t size) {
  buf.append(static_cast<const char*>(data), size);
}

template <typename T>
void put(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  put_bytes(buf, &value, sizeof(T));
}

void put_doubles(std::string& buf, const double* data, size_t count) {
  put_bytes(buf, data, count * sizeof(double));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void read(void* out, size_t size) {
    if (pos + size > buf.size()) {
      throw std::runtime_error("policy file truncated");
    }
    std::memcpy(out, buf.data() + pos, size);
    pos += size;
  }

  template <typename T>
  T get() {
    T value;
    read(&value, sizeof(T));
    return value;
  }
};

}  // namespace

uint64_t fnv1a(const void* data, size_t size, uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t hash = seed;
  for (size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void save_policy(const std::string& path, const Policy& policy) {
  std::string buf;
  put_bytes(buf, kMagic, sizeof(kMagic));
  put<uint32_t>(buf, 1);  // format version
  put<uint8_t>(buf, policy.env == EnvType::kCar ? 0 : 1);
  put_doubles(buf, policy.arm_goal.data(), 2);
  const double arm[5] = {policy.arm_params.m1, policy.arm_params.m2,
                         policy.arm_params.l1, policy.arm_params.l2,
                         policy.arm_params.damping};
  put_doubles(buf, arm, 5);
  put<uint32_t>(buf, static_cast<uint32_t>(policy.net.input_dim));
  put<uint32_t>(buf, static_cast<uint32_t>(policy.net.hidden_dim));
  put<uint32_t>(buf, static_cast<uint32_t>(policy.net.output_dim));
  put_doubles(buf, policy.action_space.lower.data(),
              policy.action_space.lower.size());
  put_doubles(buf, policy.action_space.upper.data(),
              policy.action_space.upper.size());
  put_doubles(buf, policy.net.theta.data(), policy.net.theta.size());
  put<uint64_t>(buf, fnv1a(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open policy file for writing: " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Policy load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open policy file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < sizeof(kMagic) + sizeof(uint64_t) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a policy file: " + path);
  }
  const size_t body = buf.size() - sizeof(uint64_t);
  uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (stored != fnv1a(buf.data(), body)) {
    throw std::runtime_error("policy file checksum mismatch: " + path);
  }

  Reader r{buf, sizeof(kMagic)};
  const auto version = r.get<uint32_t>();
  if (version != 1) {
    throw std::runtime_error("unsupported policy format version");
  }
  Policy policy;
  policy.env = r.get<uint8_t>() == 0 ? EnvType::kCar : EnvType::kArm;
  r.read(policy.arm_goal.data(), 2 * sizeof(double));
  double arm[5];
  r.read(arm, sizeof(arm));
  policy.arm_params = {arm[0], arm[1], arm[2], arm[3], arm[4]};
  policy.net.input_dim = static_cast<int>(r.get<uint32_t>());
  policy.net.hidden_dim = static_cast<int>(r.get<uint32_t>());
  policy.net.output_dim = static_cast<int>(r.get<uint32_t>());
  Vector lo(policy.net.output_dim), hi(policy.net.output_dim);
  r.read(lo.data(), lo.size() * sizeof(double));
  r.read(hi.data(), hi.size() * sizeof(double));
  policy.action_space = BoxSpace(lo, hi);
  policy.net.theta.resize(policy.net.param_count());
  r.read(policy.net.theta.data(), policy.net.theta.size() * sizeof(double));
  return policy;
}

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return out;
}

}  // namespace

void write_episode_csv(const std::string& path, const EpisodeResult& result) {
  auto out = open_csv(path);
  out << "t,cost,cum_cost,baseline_cum_cost,normalized,mpc_cost,saturated\n";
  for (size_t t = 0; t < result.step_cost.size(); ++t) {
    out << t << ',' << format_float(result.step_cost[t]) << ','
        << format_float(result.cum_cost[t]) << ','
        << format_float(result.baseline_cum[t]) << ','
        << format_float(result.normalized[t]) << ','
        << format_float(result.mpc_cost[t]) << ','
        << (result.saturated[t] ? 1 : 0) << '\n';
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<SuiteRow>& rows) {
  auto out = open_csv(path);
  out << "disturbance,mode,mean_normalized,std_error,episodes,diverged\n";
  for (const SuiteRow& row : rows) {
    out << row.disturbance << ',' << mode_name(row.mode) << ','
        << format_float(row.mean_normalized) << ','
        << format_float(row.std_error) << ',' << row.episodes << ','
        << row.diverged << '\n';
  }
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep) {
  auto out = open_csv(path);
  out << "control_scale,gamma,mode,mean_normalized,std_error,episodes,diverged\n";
  for (const SweepCell& cell : sweep.cells) {
    out << format_float(cell.control_scale) << ',' << format_float(cell.gamma)
        << ',' << mode_name(cell.mode) << ',' << format_float(cell.mean) << ','
        << format_float(cell.std_error) << ',' << cell.episodes << ','
        << cell.diverged << '\n';
  }
}

void write_verification_csv(const std::string& path,
                            const std::vector<VerificationRow>& rows) {
  auto out = open_csv(path);
  out << "check,pass_rate,worst_slack,episodes\n";
  for (const VerificationRow& row : rows) {
    out << row.check << ',' << format_float(row.pass_rate) << ','
        << format_float(row.worst_slack) << ',' << row.episodes << '\n';
  }
}

void write_training_curve_csv(const std::string& path,
                              const TrainResult& result) {
  auto out = open_csv(path);
  out << "iteration,best_cost,elite_mean_cost\n";
  for (size_t i = 0; i < result.best_cost_curve.size(); ++i) {
    out << i << ',' << format_float(result.best_cost_curve[i]) << ','
        << format_float(result.elite_mean_curve[i]) << '\n';
  }
}

void write_trend_csv(const std::string& path, const ScalingTrend& trend) {
  auto out = open_csv(path);
  out << "scale,mean_gap,std_error,support_radius,episodes\n";
  for (const ScalingPoint& p : trend.points) {
    out << format_float(p.scale) << ',' << format_float(p.mean_gap) << ','
        << format_float(p.std_error) << ',' << format_float(p.support_radius)
        << ',' << p.episodes << '\n';
  }
}

}  // namespace adapt
