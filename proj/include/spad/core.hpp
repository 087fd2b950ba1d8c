#pragma once

// Shared domain types, scenario configuration and the seeded random stream.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spad {

// Thin tagged wrapper so vehicle ids, content ids and topic ids cannot be mixed.
template <typename Tag>
struct StrongId {
  std::uint32_t value = 0;

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(const StrongId&, const StrongId&) = default;
};

struct VehicleTag {};
struct FleetTag {};
struct ContentTag {};
struct TopicTag {};
struct SensorTag {};

using VehicleId = StrongId<VehicleTag>;
using FleetId = StrongId<FleetTag>;
using ContentId = StrongId<ContentTag>;
using TopicId = StrongId<TopicTag>;
using SensorType = StrongId<SensorTag>;

enum class BehaviorProfile { kLegitimate, kSpeculative, kMalicious };

enum class Scheme { kSpad, kBit, kSwr, kQLearn, kGreedy, kFixedPrice };

inline constexpr std::string_view to_string(BehaviorProfile p) {
  switch (p) {
    case BehaviorProfile::kLegitimate: return "legitimate";
    case BehaviorProfile::kSpeculative: return "speculative";
    case BehaviorProfile::kMalicious: return "malicious";
  }
  return "unknown";
}

inline constexpr std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kSpad: return "SPAD";
    case Scheme::kBit: return "BIT";
    case Scheme::kSwr: return "SWR";
    case Scheme::kQLearn: return "QLEARN";
    case Scheme::kGreedy: return "GREEDY";
    case Scheme::kFixedPrice: return "FIXED_PRICE";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  for (auto s : {Scheme::kSpad, Scheme::kBit, Scheme::kSwr, Scheme::kQLearn,
                 Scheme::kGreedy, Scheme::kFixedPrice}) {
    if (to_string(s) == name) return s;
  }
  if (name == "FP") return Scheme::kFixedPrice;
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

inline constexpr std::array<Scheme, 6> kAllSchemes = {
    Scheme::kSpad,   Scheme::kBit,    Scheme::kSwr,
    Scheme::kQLearn, Scheme::kGreedy, Scheme::kFixedPrice};

struct TimeSlot {
  std::uint64_t index = 0;
  double slot_length_s = 0.1;

  double start_s() const { return static_cast<double>(index) * slot_length_s; }
  double end_s() const { return start_s() + slot_length_s; }
};

struct Cav {
  VehicleId id;
  std::size_t role_index = 0;
  BehaviorProfile profile = BehaviorProfile::kLegitimate;
  std::map<SensorType, double> sensing_capacity;
  double processing_capacity = 0.0;
  std::uint64_t cache_capacity_bytes = 0;

  // A sensor the vehicle does not carry has capacity 0.
  double sensing(SensorType g) const {
    auto it = sensing_capacity.find(g);
    return it == sensing_capacity.end() ? 0.0 : it->second;
  }
};

struct Fleet {
  FleetId id;
  VehicleId master_id;
  std::vector<VehicleId> member_ids;
  double fleet_velocity_mps = 0.0;
  double inter_vehicle_distance_m = 10.0;
  std::uint64_t broker_buffer_bytes = 0;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct BehaviorMix {
  double legitimate = 0.6;
  double speculative = 0.2;
  double malicious = 0.2;
};

struct ScenarioConfig {
  int num_road_segments = 100;
  Range segment_length_range_m{20.0, 200.0};
  double mec_spacing_m = 200.0;
  double mec_radius_m = 100.0;
  Range vehicle_density_range{10.0, 120.0};  // vehicles per km
  Range fleet_velocity_range_kmh{50.0, 110.0};
  int num_time_slots = 2000;
  std::int64_t rng_seed = 1;
  BehaviorMix behavior_mix{};
  Scheme scheme = Scheme::kSpad;

  // Scenario knobs beyond the road/fleet geometry.
  double slot_length_s = 0.1;
  int max_vehicles = 0;  // 0 = no cap
  double speculative_honest_prob = 0.5;
  double subscribe_prob = 0.5;
  double report_prob = 1.0;
  double detection_prob = 1.0;
  int num_roles = 10;
  bool role_correlation = true;
  int num_sensor_types = 3;
  int retention_window_slots = 1;
  double reputation_threshold = 0.45;
  bool honest_reporters_only = false;  // dishonest-acting subscribers stay silent
  double trust_time_per_slot = 1.0;   // time units per slot in the trust model
};

struct Violation {
  std::string field;
  std::string message;
};

inline std::vector<Violation> validate_config(const ScenarioConfig& cfg) {
  std::vector<Violation> out;
  auto check = [&](bool ok, std::string field, std::string msg) {
    if (!ok) out.push_back({std::move(field), std::move(msg)});
  };
  auto check_range = [&](const Range& r, const char* field, double lo) {
    check(r.min <= r.max, field, "min exceeds max");
    check(r.min >= lo, field, "min below allowed lower bound");
  };
  check(cfg.num_road_segments > 0, "num_road_segments", "must be positive");
  check_range(cfg.segment_length_range_m, "segment_length_range_m", 0.0);
  check(cfg.segment_length_range_m.min > 0.0, "segment_length_range_m",
        "segment length must be positive");
  check(cfg.mec_spacing_m > 0.0, "mec_spacing_m", "must be positive");
  check(cfg.mec_radius_m > 0.0, "mec_radius_m", "must be positive");
  check_range(cfg.vehicle_density_range, "vehicle_density_range", 0.0);
  check_range(cfg.fleet_velocity_range_kmh, "fleet_velocity_range_kmh", 0.0);
  check(cfg.num_time_slots > 0, "num_time_slots", "must be positive");
  const auto& m = cfg.behavior_mix;
  check(m.legitimate >= 0 && m.speculative >= 0 && m.malicious >= 0,
        "behavior_mix", "ratios must be non-negative");
  check(std::abs(m.legitimate + m.speculative + m.malicious - 1.0) <= 1e-9,
        "behavior_mix", "ratios must sum to 1");
  check(cfg.slot_length_s > 0.0, "slot_length_s", "must be positive");
  check(cfg.max_vehicles >= 0, "max_vehicles", "must be non-negative");
  auto prob = [&](double p, const char* field) {
    check(p >= 0.0 && p <= 1.0, field, "must lie in [0,1]");
  };
  prob(cfg.speculative_honest_prob, "speculative_honest_prob");
  prob(cfg.subscribe_prob, "subscribe_prob");
  prob(cfg.report_prob, "report_prob");
  prob(cfg.detection_prob, "detection_prob");
  prob(cfg.reputation_threshold, "reputation_threshold");
  check(cfg.num_roles >= 3, "num_roles", "need at least 3 roles");
  check(cfg.num_sensor_types >= 1, "num_sensor_types", "must be positive");
  check(cfg.retention_window_slots >= 1, "retention_window_slots",
        "must be positive");
  return out;
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<double> parse_numbers(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    out.push_back(v);
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(v);
}

}  // namespace detail

// Reads `key = value` lines; `#` starts a comment. Unknown keys are errors.
inline ScenarioConfig load_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = detail::trim(std::string_view(text).substr(0, eq));
    const auto value = detail::trim(std::string_view(text).substr(eq + 1));
    auto scalar = [&] {
      auto v = detail::parse_numbers(value);
      if (v.size() != 1) throw std::invalid_argument("expected one number");
      return v[0];
    };
    auto integer = [&] {
      const double v = scalar();
      if (v != std::floor(v)) throw std::invalid_argument("expected an integer");
      return static_cast<std::int64_t>(v);
    };
    auto range = [&] {
      auto v = detail::parse_numbers(value);
      if (v.size() != 2) throw std::invalid_argument("expected min, max");
      return Range{v[0], v[1]};
    };
    try {
      if (key == "num_road_segments") cfg.num_road_segments = static_cast<int>(integer());
      else if (key == "segment_length_range_m") cfg.segment_length_range_m = range();
      else if (key == "mec_spacing_m") cfg.mec_spacing_m = scalar();
      else if (key == "mec_radius_m") cfg.mec_radius_m = scalar();
      else if (key == "vehicle_density_range") cfg.vehicle_density_range = range();
      else if (key == "fleet_velocity_range_kmh") cfg.fleet_velocity_range_kmh = range();
      else if (key == "num_time_slots") cfg.num_time_slots = static_cast<int>(integer());
      else if (key == "rng_seed") cfg.rng_seed = integer();
      else if (key == "behavior_mix") {
        auto v = detail::parse_numbers(value);
        if (v.size() != 3) throw std::invalid_argument("expected r_l, r_s, r_m");
        cfg.behavior_mix = {v[0], v[1], v[2]};
      } else if (key == "scheme") cfg.scheme = parse_scheme(value);
      else if (key == "slot_length_s") cfg.slot_length_s = scalar();
      else if (key == "max_vehicles") cfg.max_vehicles = static_cast<int>(integer());
      else if (key == "speculative_honest_prob") cfg.speculative_honest_prob = scalar();
      else if (key == "subscribe_prob") cfg.subscribe_prob = scalar();
      else if (key == "report_prob") cfg.report_prob = scalar();
      else if (key == "detection_prob") cfg.detection_prob = scalar();
      else if (key == "num_roles") cfg.num_roles = static_cast<int>(integer());
      else if (key == "role_correlation") cfg.role_correlation = detail::parse_bool(value);
      else if (key == "num_sensor_types") cfg.num_sensor_types = static_cast<int>(integer());
      else if (key == "retention_window_slots") cfg.retention_window_slots = static_cast<int>(integer());
      else if (key == "reputation_threshold") cfg.reputation_threshold = scalar();
      else if (key == "honest_reporters_only") cfg.honest_reporters_only = detail::parse_bool(value);
      else if (key == "trust_time_per_slot") cfg.trust_time_per_slot = scalar();
      else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key +
                        "': " + e.what());
    }
  }
  return cfg;
}

inline ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return load_config(in);
}

// Deterministic random stream. Forks are derived from the root seed and the
// (stream, id) pair only, never from the parent's consumed state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  Rng fork(std::uint64_t stream, std::uint64_t id = 0) const {
    return Rng(mix(seed_ ^ mix(stream * 0x9E3779B97F4A7C15ULL + id)));
  }

  std::uint64_t seed() const { return seed_; }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double uniform(const Range& r) { return uniform(r.min, r.max); }

  // Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

  static constexpr std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

}  // namespace spad

template <typename Tag>
struct std::hash<spad::StrongId<Tag>> {
  std::size_t operator()(const spad::StrongId<Tag>& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
