#pragma once

// Tabular learners for the repeated pub/sub game. The subscriber group learns
// payment pairs, the publisher learns quality pairs; both can be hotbooted
// from earlier experiments on perturbed copies of the game.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spad/core.hpp"
#include "spad/stackelberg.hpp"

namespace spad {

// Nearest grid index of value on {0, cap/levels, ..., cap}; ties round down.
inline int quantize(double value, int levels, double cap) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (!(cap > 0)) throw std::invalid_argument("cap must be positive");
  const double x = std::clamp(value, 0.0, cap) / cap * levels;
  return std::clamp(static_cast<int>(std::ceil(x - 0.5)), 0, levels);
}

struct ActionGrid {
  int payment_levels = 16;  // X
  int qocs_levels = 10;     // Y
  double price_cap = 5.0;

  int payment_actions() const { return (payment_levels + 1) * (payment_levels + 1); }
  int qocs_actions() const { return (qocs_levels + 1) * (qocs_levels + 1); }

  PriceVector price_of(int action) const {
    const int n = payment_levels + 1;
    return {price_cap * (action / n) / payment_levels, price_cap * (action % n) / payment_levels};
  }
  QoCSVector qocs_of(int action) const {
    const int n = qocs_levels + 1;
    return {static_cast<double>(action / n) / qocs_levels,
            static_cast<double>(action % n) / qocs_levels};
  }
  int price_index(const PriceVector& p) const {
    return quantize(p.raw, payment_levels, price_cap) * (payment_levels + 1) +
           quantize(p.result, payment_levels, price_cap);
  }
  int qocs_index(const QoCSVector& q) const {
    return quantize(q.raw, qocs_levels, 1.0) * (qocs_levels + 1) +
           quantize(q.result, qocs_levels, 1.0);
  }

  friend bool operator==(const ActionGrid&, const ActionGrid&) = default;
};

inline void validate(const ActionGrid& g) {
  if (g.payment_levels < 1 || g.qocs_levels < 1)
    throw std::invalid_argument("grid levels must be >= 1");
  if (!(g.price_cap > 0)) throw std::invalid_argument("price cap must be positive");
}

struct LearnerParams {
  double learn_rate = 0.7;    // psi
  double discount = 0.7;      // chi
  double step = 0.01;         // delta
  double reward_scale = 1.0;  // lambda
};

// Q table, value table and a mixed strategy per state.
class TabularLearner {
 public:
  TabularLearner(int states, int actions, LearnerParams params)
      : states_(states), actions_(actions), params_(params),
        q_(static_cast<std::size_t>(states) * actions, 0.0),
        value_(static_cast<std::size_t>(states), 0.0),
        policy_(static_cast<std::size_t>(states) * actions, 1.0 / actions) {
    if (states < 1 || actions < 2) throw std::invalid_argument("learner needs >= 2 actions");
    if (!(params.learn_rate > 0 && params.learn_rate <= 1))
      throw std::invalid_argument("learn_rate must be in (0,1]");
    if (params.discount < 0 || params.discount > 1)
      throw std::invalid_argument("discount must be in [0,1]");
    if (!(params.step > 0 && params.step <= 1)) throw std::invalid_argument("step must be in (0,1]");
    if (!(params.reward_scale > 0)) throw std::invalid_argument("reward_scale must be positive");
  }

  int states() const { return states_; }
  int actions() const { return actions_; }
  const LearnerParams& params() const { return params_; }
  void set_params(const LearnerParams& p) { params_ = p; }

  double q(int s, int a) const { return q_[index(s, a)]; }
  double value(int s) const { return value_.at(static_cast<std::size_t>(s)); }
  std::span<const double> q_row(int s) const { return {&q_[index(s, 0)], row_size()}; }
  std::span<const double> policy_row(int s) const { return {&policy_[index(s, 0)], row_size()}; }

  // Lowest index among the maximisers.
  int greedy_action(int s) const {
    const auto row = q_row(s);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  void update_q(int s, int a, double reward, int next) {
    const auto next_row = q_row(next);
    const double next_value = *std::max_element(next_row.begin(), next_row.end());
    value_[static_cast<std::size_t>(next)] = next_value;
    double& entry = q_[index(s, a)];
    entry += params_.learn_rate * (params_.reward_scale * reward +
                                   params_.discount * next_value - entry);
    const auto row = q_row(s);
    value_[static_cast<std::size_t>(s)] = *std::max_element(row.begin(), row.end());
  }

  // Hill-climbing step toward the greedy action, then projection onto the simplex.
  void update_policy(int s) {
    const int greedy = greedy_action(s);
    const double down = params_.step / (actions_ - 1);
    double* row = &policy_[index(s, 0)];
    double sum = 0.0;
    for (int a = 0; a < actions_; ++a) {
      row[a] = std::clamp(row[a] + (a == greedy ? params_.step : -down), 0.0, 1.0);
      sum += row[a];
    }
    for (int a = 0; a < actions_; ++a) row[a] /= sum;
  }

  void update(int s, int a, double reward, int next) {
    update_q(s, a, reward, next);
    update_policy(s);
  }

  std::vector<double>& q_table() { return q_; }
  std::vector<double>& policy_table() { return policy_; }
  const std::vector<double>& q_table() const { return q_; }
  const std::vector<double>& policy_table() const { return policy_; }

  // Rebuilds the value table from the Q table, for freshly loaded tables.
  void refresh_values() {
    for (int s = 0; s < states_; ++s) {
      const auto row = q_row(s);
      value_[static_cast<std::size_t>(s)] = *std::max_element(row.begin(), row.end());
    }
  }

 private:
  std::size_t index(int s, int a) const {
    if (s < 0 || s >= states_ || a < 0 || a >= actions_) throw std::out_of_range("table index");
    return static_cast<std::size_t>(s) * actions_ + a;
  }
  std::size_t row_size() const { return static_cast<std::size_t>(actions_); }

  int states_;
  int actions_;
  LearnerParams params_;
  std::vector<double> q_;
  std::vector<double> value_;
  std::vector<double> policy_;
};

inline void check_distribution(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("empty policy row");
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("policy entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("policy row does not sum to 1");
}

inline int sample_action(std::span<const double> row, Rng& rng) {
  check_distribution(row);
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (row[a] <= 0.0) continue;
    acc += row[a];
    last_positive = static_cast<int>(a);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

inline int epsilon_greedy(const TabularLearner& l, int s, double epsilon, Rng& rng) {
  if (epsilon < 0 || epsilon > 1) throw std::invalid_argument("epsilon must be in [0,1]");
  if (epsilon > 0 && rng.bernoulli(epsilon))
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(l.actions())));
  return l.greedy_action(s);
}

enum class LearnerKind { kPhc, kQLearning, kGreedy, kFixedPrice };

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::kPhc: return "PHC";
    case LearnerKind::kQLearning: return "QLEARN";
    case LearnerKind::kGreedy: return "GREEDY";
    case LearnerKind::kFixedPrice: return "FP";
  }
  return "?";
}

struct DynamicGameConfig {
  GameInstance instance;
  ActionGrid grid;
  LearnerParams subscriber;
  LearnerParams publisher;
  double epsilon = 0.1;                 // exploration of the Q-learning baseline
  PriceVector fixed_price{1.2, 1.2};
  // The publisher picks its quality knowing the payment of the current slot.
  // When false it only conditions on the previous slot's payment.
  bool publisher_sees_current_payment = true;
  double hotboot_jitter = 0.1;          // relative spread of perturbed experiments
};

// Two-part game used for learning experiments: two subscribers per part,
// publisher capacities (0.75, 0.6), both cost parameters 0.4.
inline DynamicGameConfig reference_game() {
  DynamicGameConfig cfg;
  cfg.instance.group = {2, 2};
  cfg.instance.econ.satisfaction_coeff = 42;
  cfg.instance.econ.raw_cost_param = 0.4;
  cfg.instance.econ.result_cost_param = 0.4;
  cfg.instance.caps = {0.75, 0.6};
  cfg.instance.popularity = 1.0;
  cfg.instance.reputation = 0.8;
  return cfg;
}

struct LearnerPair {
  TabularLearner subscriber;
  TabularLearner publisher;

  LearnerPair(const ActionGrid& grid, const LearnerParams& sub, const LearnerParams& pub)
      : subscriber(grid.qocs_actions(), grid.payment_actions(), sub),
        publisher(grid.payment_actions(), grid.qocs_actions(), pub) {}
};

struct TraceRow {
  std::uint64_t slot = 0;
  ContentId content_id;
  PriceVector price;
  QoCSVector qocs;
  double group_utility = 0.0;
  double publisher_utility = 0.0;
};

// Quality contracted by an inactive part is meaningless; keep it at zero.
inline QoCSVector mask_inactive(const GameInstance& g, QoCSVector q) {
  for (int u = 0; u < 2; ++u) {
    if (g.group[u] == 0) q[u] = 0.0;
  }
  return q;
}

inline PriceVector mask_inactive(const GameInstance& g, PriceVector p) {
  for (int u = 0; u < 2; ++u) {
    if (g.group[u] == 0) p[u] = 0.0;
  }
  return p;
}

// Carries the previous moves of one content's game between slots.
struct GameMemory {
  PriceVector last_price{};
  QoCSVector last_qocs{};
};

// One slot of the repeated game for one content.
inline TraceRow play_slot(const DynamicGameConfig& cfg, const GameInstance& inst,
                          LearnerKind kind, LearnerPair* learners, GameMemory& memory,
                          std::uint64_t slot, Rng& rng, bool learn = true) {
  const ActionGrid& grid = cfg.grid;
  TraceRow row;
  row.slot = slot;

  if (kind == LearnerKind::kFixedPrice) {
    row.price = mask_inactive(inst, cfg.fixed_price);
    const auto out = fixed_price_outcome(inst, cfg.fixed_price);
    row.qocs = out.qocs;
  } else {
    if (learners == nullptr) throw std::invalid_argument("learning scheme needs learner tables");
    auto& sub = learners->subscriber;
    auto& pub = learners->publisher;
    const int sub_state = grid.qocs_index(memory.last_qocs);
    int price_action = 0;
    switch (kind) {
      case LearnerKind::kPhc: price_action = sample_action(sub.policy_row(sub_state), rng); break;
      case LearnerKind::kQLearning: price_action = epsilon_greedy(sub, sub_state, cfg.epsilon, rng); break;
      default: price_action = sub.greedy_action(sub_state); break;
    }
    row.price = mask_inactive(inst, grid.price_of(price_action));

    const int pub_state = grid.price_index(cfg.publisher_sees_current_payment ? row.price
                                                                              : memory.last_price);
    int qocs_action = 0;
    switch (kind) {
      case LearnerKind::kPhc: qocs_action = sample_action(pub.policy_row(pub_state), rng); break;
      case LearnerKind::kQLearning: qocs_action = epsilon_greedy(pub, pub_state, cfg.epsilon, rng); break;
      default: qocs_action = pub.greedy_action(pub_state); break;
    }
    row.qocs = mask_inactive(inst, grid.qocs_of(qocs_action));

    row.group_utility = leader_utility(inst, row.price, row.qocs);
    row.publisher_utility = follower_utility(inst, row.price, row.qocs);
    if (learn) {
      const int sub_next = grid.qocs_index(row.qocs);
      const int pub_next = grid.price_index(row.price);
      if (kind == LearnerKind::kPhc) {
        sub.update(sub_state, price_action, row.group_utility, sub_next);
        pub.update(pub_state, qocs_action, row.publisher_utility, pub_next);
      } else {
        sub.update_q(sub_state, price_action, row.group_utility, sub_next);
        pub.update_q(pub_state, qocs_action, row.publisher_utility, pub_next);
      }
    }
    memory.last_price = row.price;
    memory.last_qocs = row.qocs;
    return row;
  }

  row.group_utility = leader_utility(inst, row.price, row.qocs);
  row.publisher_utility = follower_utility(inst, row.price, row.qocs);
  memory.last_price = row.price;
  memory.last_qocs = row.qocs;
  return row;
}

inline std::vector<TraceRow> run_game(const DynamicGameConfig& cfg, LearnerKind kind,
                                      LearnerPair* learners, std::uint64_t slots, Rng& rng,
                                      const GameInstance* instance = nullptr) {
  const GameInstance& inst = instance ? *instance : cfg.instance;
  validate(inst);
  validate(cfg.grid);
  std::vector<TraceRow> trace;
  trace.reserve(slots);
  GameMemory memory;
  for (std::uint64_t t = 1; t <= slots; ++t) {
    trace.push_back(play_slot(cfg, inst, kind, learners, memory, t, rng));
  }
  return trace;
}

struct HotbootCache {
  ActionGrid grid;
  std::uint32_t experiments = 0;
  LearnerPair tables;

  HotbootCache(const ActionGrid& g, const LearnerParams& sub, const LearnerParams& pub)
      : grid(g), tables(g, sub, pub) {}
};

// Copy of the game with satisfaction, costs and capacities jittered.
inline GameInstance perturb(const GameInstance& base, double jitter, Rng& rng) {
  GameInstance g = base;
  auto scale = [&] { return 1.0 + rng.uniform(-jitter, jitter); };
  g.econ.satisfaction_coeff *= scale();
  g.econ.raw_cost_param *= scale();
  g.econ.result_cost_param *= scale();
  g.caps.sensing = std::clamp(g.caps.sensing * scale(), 1e-3, 1.0);
  g.caps.processing = std::clamp(g.caps.processing * scale(), 1e-3, 1.0);
  return g;
}

// Runs `experiments` PHC experiments of `slots` slots each on perturbed games,
// accumulating both tiers into one pair of tables.
inline HotbootCache hotboot(const DynamicGameConfig& cfg, std::uint32_t experiments,
                            std::uint64_t slots, std::uint64_t seed) {
  HotbootCache cache(cfg.grid, cfg.subscriber, cfg.publisher);
  const Rng root(seed);
  for (std::uint32_t w = 0; w < experiments; ++w) {
    Rng rng = root.fork(0x4854u, w);
    const GameInstance inst = perturb(cfg.instance, cfg.hotboot_jitter, rng);
    run_game(cfg, LearnerKind::kPhc, &cache.tables, slots, rng, &inst);
  }
  cache.experiments = experiments;
  return cache;
}

inline std::vector<TraceRow> run_dynamic_game(const DynamicGameConfig& cfg,
                                              const HotbootCache& cache, std::uint64_t slots,
                                              Rng& rng) {
  if (!(cache.grid == cfg.grid)) throw std::invalid_argument("cache grid does not match game");
  LearnerPair learners = cache.tables;
  learners.subscriber.set_params(cfg.subscriber);
  learners.publisher.set_params(cfg.publisher);
  return run_game(cfg, LearnerKind::kPhc, &learners, slots, rng);
}

inline std::vector<TraceRow> qlearning_baseline(const DynamicGameConfig& cfg, std::uint64_t slots,
                                                Rng& rng) {
  LearnerPair learners(cfg.grid, cfg.subscriber, cfg.publisher);
  return run_game(cfg, LearnerKind::kQLearning, &learners, slots, rng);
}

inline std::vector<TraceRow> greedy_baseline(const DynamicGameConfig& cfg, std::uint64_t slots,
                                             Rng& rng) {
  LearnerPair learners(cfg.grid, cfg.subscriber, cfg.publisher);
  return run_game(cfg, LearnerKind::kGreedy, &learners, slots, rng);
}

inline std::vector<TraceRow> fixed_price_baseline(const DynamicGameConfig& cfg,
                                                  std::uint64_t slots, Rng& rng) {
  return run_game(cfg, LearnerKind::kFixedPrice, nullptr, slots, rng);
}

// Mean quality over the subscribed parts.
inline double mean_active_qocs(const GameInstance& g, const QoCSVector& q) {
  double sum = 0.0;
  int parts = 0;
  for (int u = 0; u < 2; ++u) {
    if (g.group[u] > 0) {
      sum += q[u];
      ++parts;
    }
  }
  return parts == 0 ? 0.0 : sum / parts;
}

// First 1-based slot after which the trailing moving average stays within
// rel_tol of its final value. Windows are truncated at the start of the series.
inline std::optional<std::uint64_t> convergence_slot(std::span<const double> series,
                                                     std::size_t window = 100,
                                                     double rel_tol = 0.05) {
  if (series.empty() || window == 0) return std::nullopt;
  std::vector<double> avg(series.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    acc += series[t];
    if (t >= window) acc -= series[t - window];
    avg[t] = acc / static_cast<double>(std::min(t + 1, window));
  }
  const double final_value = avg.back();
  const double tol = rel_tol * std::abs(final_value);
  std::size_t first = series.size();
  while (first > 0 && std::abs(avg[first - 1] - final_value) <= tol) --first;
  return first + 1;
}

inline void write_trace_header(std::ostream& os) {
  os << "slot,content_id,p1,p2,q1,q2,U_group,U_publisher,scheme\n";
}

inline void write_trace_rows(std::ostream& os, std::span<const TraceRow> rows,
                             std::string_view scheme) {
  for (const auto& r : rows) {
    os << r.slot << ',' << r.content_id.value << ',' << r.price.raw << ',' << r.price.result
       << ',' << r.qocs.raw << ',' << r.qocs.result << ',' << r.group_utility << ','
       << r.publisher_utility << ',' << scheme << '\n';
  }
}

// --- cache files -------------------------------------------------------------

class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCacheMagic[6] = {'S', 'P', 'A', 'D', 'H', 'B'};
inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw CacheError("truncated cache file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

inline void put_table(std::ostream& os, const std::vector<double>& t) {
  put<std::uint64_t>(os, t.size());
  for (double v : t) put<double>(os, v);
}

inline void get_table(std::istream& is, std::vector<double>& t) {
  if (get<std::uint64_t>(is) != t.size()) throw CacheError("cache table size mismatch");
  for (double& v : t) v = get<double>(is);
}

}  // namespace detail

// Layout: magic[6] | version u32 | X u32 | Y u32 | price_cap f64 | W u32 |
// four tables (subscriber Q, subscriber policy, publisher Q, publisher policy),
// each as u64 length followed by f64 entries. Little-endian throughout.
inline void write_cache(std::ostream& os, const HotbootCache& c) {
  os.write(kCacheMagic, sizeof kCacheMagic);
  detail::put<std::uint32_t>(os, kCacheVersion);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(c.grid.payment_levels));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(c.grid.qocs_levels));
  detail::put<double>(os, c.grid.price_cap);
  detail::put<std::uint32_t>(os, c.experiments);
  detail::put_table(os, c.tables.subscriber.q_table());
  detail::put_table(os, c.tables.subscriber.policy_table());
  detail::put_table(os, c.tables.publisher.q_table());
  detail::put_table(os, c.tables.publisher.policy_table());
  if (!os) throw CacheError("failed to write cache");
}

inline HotbootCache read_cache(std::istream& is, const ActionGrid& expected,
                               const LearnerParams& sub, const LearnerParams& pub) {
  char magic[sizeof kCacheMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCacheMagic, sizeof magic) != 0)
    throw CacheError("not a hotboot cache file");
  const auto version = detail::get<std::uint32_t>(is);
  if (version != kCacheVersion)
    throw CacheError("cache version mismatch: file has " + std::to_string(version) +
                     ", expected " + std::to_string(kCacheVersion));
  ActionGrid grid;
  grid.payment_levels = static_cast<int>(detail::get<std::uint32_t>(is));
  grid.qocs_levels = static_cast<int>(detail::get<std::uint32_t>(is));
  grid.price_cap = detail::get<double>(is);
  if (!(grid == expected)) throw CacheError("cache grid parameters do not match");
  HotbootCache c(grid, sub, pub);
  c.experiments = detail::get<std::uint32_t>(is);
  detail::get_table(is, c.tables.subscriber.q_table());
  detail::get_table(is, c.tables.subscriber.policy_table());
  detail::get_table(is, c.tables.publisher.q_table());
  detail::get_table(is, c.tables.publisher.policy_table());
  c.tables.subscriber.refresh_values();
  c.tables.publisher.refresh_values();
  for (int s = 0; s < c.tables.subscriber.states(); ++s)
    check_distribution(c.tables.subscriber.policy_row(s));
  for (int s = 0; s < c.tables.publisher.states(); ++s)
    check_distribution(c.tables.publisher.policy_row(s));
  return c;
}

}  // namespace spad
