#pragma once

// Scenario generation and the per-slot episode loop tying mobility, brokering,
// trust, pricing and attack injection together.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spad/broker.hpp"
#include "spad/channel.hpp"
#include "spad/content.hpp"
#include "spad/core.hpp"
#include "spad/economics.hpp"
#include "spad/learning.hpp"
#include "spad/mobility.hpp"
#include "spad/reputation.hpp"
#include "spad/stackelberg.hpp"

namespace spad {

struct RoadSegment {
  double start_m = 0.0;
  double length_m = 0.0;
  double density_per_km = 0.0;
};

struct MecNode {
  double x_m = 0.0;
  double radius_m = 0.0;
};

// Private cost parameters of a publisher.
struct PublisherCosts {
  std::map<SensorType, double> raw;  // per sensor type
  double result = 0.4;
};

struct World {
  ScenarioConfig cfg;
  std::vector<RoadSegment> segments;
  std::vector<MecNode> mec_nodes;
  std::vector<Fleet> fleets;
  std::vector<Cav> vehicles;                // indexed by VehicleId::value
  std::vector<VehicleState> initial_states;
  std::vector<PublisherCosts> costs;
  std::vector<FleetId> fleet_of;
  std::vector<double> role_trust;           // sorted ascending

  const Cav& vehicle(VehicleId id) const { return vehicles.at(id.value); }
  std::size_t count(BehaviorProfile p) const {
    return static_cast<std::size_t>(std::count_if(
        vehicles.begin(), vehicles.end(), [&](const Cav& c) { return c.profile == p; }));
  }
};

// Draws that are not part of the scenario file.
struct ModelParams {
  Range satisfaction_range{25.0, 45.0};
  Range cost_param_range{0.4, 2.0};
  Range raw_size_mb{0.1, 0.5};
  Range result_size_kb{1.0, 20.0};
  Range role_trust_range{1.0, 10.0};
  EconParams econ;           // satisfaction and cost parameters are redrawn per content
  ChannelParams channel;
  double zipf_exponent = 0.9;
  std::uint64_t broker_buffer_bytes = 1u << 20;
  TrustParams trust;         // role_trust is filled from the world
  ActionGrid grid;
  LearnerParams learner;
  double epsilon = 0.1;
  PriceVector fixed_price{1.2, 1.2};
};

namespace detail {

enum Stream : std::uint64_t {
  kSegment = 1,
  kFleet,
  kVehicle,
  kRoles,
  kBehaviour,
  kPublish,
  kSubscribe,
  kReport,
  kLearner,
};

// Role bands used when profiles correlate with role trust: the least trusted
// 30% of roles go to malicious vehicles, the middle 40% to speculative ones,
// the top 30% to legitimate ones.
inline std::size_t draw_role(BehaviorProfile p, std::size_t roles, bool correlated, Rng& rng) {
  if (!correlated || roles < 3) return static_cast<std::size_t>(rng.below(roles));
  const auto low_end = std::max<std::size_t>(1, (roles * 3) / 10);
  const auto high_start = std::min(roles - 1, roles - std::max<std::size_t>(1, (roles * 3) / 10));
  std::size_t lo = 0, hi = roles;
  switch (p) {
    case BehaviorProfile::kMalicious: lo = 0; hi = low_end; break;
    case BehaviorProfile::kSpeculative: lo = low_end; hi = std::max(high_start, low_end + 1); break;
    case BehaviorProfile::kLegitimate: lo = high_start; hi = roles; break;
  }
  return lo + static_cast<std::size_t>(rng.below(hi - lo));
}

}  // namespace detail

inline World generate_scenario(const ScenarioConfig& cfg, const ModelParams& model = {}) {
  if (auto v = validate_config(cfg); !v.empty())
    throw std::invalid_argument("invalid scenario: " + v.front().field + ": " + v.front().message);
  World w;
  w.cfg = cfg;
  const Rng root(static_cast<std::uint64_t>(cfg.rng_seed));

  double x = 0.0;
  for (int k = 0; k < cfg.num_road_segments; ++k) {
    Rng rng = root.fork(detail::kSegment, static_cast<std::uint64_t>(k));
    RoadSegment s;
    s.start_m = x;
    s.length_m = rng.uniform(cfg.segment_length_range_m);
    s.density_per_km = rng.uniform(cfg.vehicle_density_range);
    x += s.length_m;
    w.segments.push_back(s);
  }
  for (double m = 0.0; m <= x; m += cfg.mec_spacing_m) w.mec_nodes.push_back({m, cfg.mec_radius_m});

  {
    Rng rng = root.fork(detail::kRoles);
    for (int a = 0; a < cfg.num_roles; ++a) w.role_trust.push_back(rng.uniform(model.role_trust_range));
    std::sort(w.role_trust.begin(), w.role_trust.end());
  }

  // Profiles are assigned by exact shares of the fleet population, then
  // shuffled so that no segment is favoured.
  std::vector<std::pair<std::size_t, std::size_t>> seats;  // (segment, slot in segment)
  for (std::size_t k = 0; k < w.segments.size(); ++k) {
    const auto& s = w.segments[k];
    const auto n = static_cast<std::size_t>(std::lround(s.length_m / 1000.0 * s.density_per_km));
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.max_vehicles > 0 && seats.size() >= static_cast<std::size_t>(cfg.max_vehicles)) break;
      seats.emplace_back(k, i);
    }
  }
  const std::size_t total = seats.size();
  std::vector<BehaviorProfile> profiles(total, BehaviorProfile::kLegitimate);
  {
    const auto n_mal = static_cast<std::size_t>(std::lround(cfg.behavior_mix.malicious * total));
    const auto n_spec = std::min(total - n_mal,
                                 static_cast<std::size_t>(std::lround(cfg.behavior_mix.speculative * total)));
    std::fill_n(profiles.begin(), n_mal, BehaviorProfile::kMalicious);
    std::fill_n(profiles.begin() + static_cast<std::ptrdiff_t>(n_mal), n_spec,
                BehaviorProfile::kSpeculative);
    Rng rng = root.fork(detail::kBehaviour);
    std::shuffle(profiles.begin(), profiles.end(), rng.engine());
  }

  std::map<std::size_t, std::vector<VehicleId>> by_segment;
  for (std::size_t v = 0; v < total; ++v) {
    const VehicleId id(static_cast<std::uint32_t>(v));
    Rng rng = root.fork(detail::kVehicle, v);
    Cav c;
    c.id = id;
    c.profile = profiles[v];
    c.role_index = detail::draw_role(c.profile, w.role_trust.size(), cfg.role_correlation, rng);
    PublisherCosts cost;
    for (int g = 0; g < cfg.num_sensor_types; ++g) {
      const SensorType t(static_cast<std::uint32_t>(g));
      c.sensing_capacity[t] = rng.uniform();
      cost.raw[t] = rng.uniform(model.cost_param_range);
    }
    c.processing_capacity = rng.uniform();
    cost.result = rng.uniform(model.cost_param_range);
    c.cache_capacity_bytes = 512 * kBytesPerMB + rng.below(512 * kBytesPerMB);
    w.vehicles.push_back(std::move(c));
    w.costs.push_back(std::move(cost));
    by_segment[seats[v].first].push_back(id);
  }

  w.fleet_of.resize(total);
  w.initial_states.resize(total);
  for (const auto& [k, members] : by_segment) {
    Rng rng = root.fork(detail::kFleet, k);
    const auto& seg = w.segments[k];
    Fleet f;
    f.id = FleetId(static_cast<std::uint32_t>(w.fleets.size()));
    f.member_ids = members;
    f.master_id = members.front();
    f.fleet_velocity_mps = kmh_to_mps(rng.uniform(cfg.fleet_velocity_range_kmh));
    f.inter_vehicle_distance_m = seg.length_m / static_cast<double>(members.size());
    f.broker_buffer_bytes = model.broker_buffer_bytes;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const auto id = members[i];
      w.fleet_of[id.value] = f.id;
      w.initial_states[id.value] =
          VehicleState{seg.start_m + static_cast<double>(i) * f.inter_vehicle_distance_m, 0.0,
                       f.fleet_velocity_mps, 0.0};
    }
    w.fleets.push_back(std::move(f));
  }
  return w;
}

// Mechanism settings that distinguish the compared schemes.
struct SchemeConfig {
  Scheme scheme = Scheme::kSpad;
  TrustParams trust;
  bool reputation_enabled = true;  // false: every publisher counts as fully trusted
  enum class Pricing { kStatic, kLearned, kFixed } pricing = Pricing::kStatic;
  LearnerKind learner = LearnerKind::kPhc;
};

inline SchemeConfig make_scheme_config(Scheme s, const World& w, const ModelParams& model = {}) {
  SchemeConfig c;
  c.scheme = s;
  c.trust = model.trust;
  c.trust.role_trust = w.role_trust;
  switch (s) {
    case Scheme::kSpad: break;
    case Scheme::kBit: c.trust = TrustParams::bit(w.role_trust); break;
    case Scheme::kSwr: c.reputation_enabled = false; break;
    case Scheme::kQLearn:
      c.pricing = SchemeConfig::Pricing::kLearned;
      c.learner = LearnerKind::kQLearning;
      break;
    case Scheme::kGreedy:
      c.pricing = SchemeConfig::Pricing::kLearned;
      c.learner = LearnerKind::kGreedy;
      break;
    case Scheme::kFixedPrice: c.pricing = SchemeConfig::Pricing::kFixed; break;
  }
  return c;
}

struct DeliveryRecord {
  std::uint64_t slot = 0;
  ContentId content_id;
  VehicleId publisher;
  VehicleId subscriber;
  bool honest = true;
  double publisher_reputation = 1.0;
  double threshold = 0.0;
};

struct SlotSummary {
  std::uint64_t slot = 0;
  std::array<double, 3> avg_reputation{};  // indexed by BehaviorProfile
  std::uint64_t deliveries = 0;
  std::uint64_t secure_deliveries = 0;
  std::uint64_t priced_contents = 0;
  double avg_qocs = 0.0;
  double avg_q1 = 0.0;
  double avg_q2 = 0.0;
  double avg_price = 0.0;
  double avg_group_utility = 0.0;
  double avg_publisher_utility = 0.0;
  double payments = 0.0;
  double revenue = 0.0;
  std::uint64_t detections = 0;
};

struct Metrics {
  double secure_pubsub_ratio = 1.0;
  std::array<double, 2> avg_qocs{};
  double avg_group_utility = 0.0;
  double avg_publisher_utility = 0.0;
  std::map<BehaviorProfile, double> avg_reputation_by_profile;
  std::optional<std::uint64_t> convergence_slot;
};

struct EpisodeResult {
  Metrics metrics;
  std::vector<SlotSummary> slots;
  std::vector<DeliveryRecord> deliveries;  // kept only on request
  std::optional<std::uint64_t> first_detection_slot;
  std::uint64_t gating_violations = 0;
  double max_payment_imbalance = 0.0;
};

struct EpisodeOptions {
  std::optional<int> slots;  // overrides cfg.num_time_slots
  bool keep_deliveries = false;
};

inline std::size_t profile_index(BehaviorProfile p) { return static_cast<std::size_t>(p); }

// Ratio, averages and convergence from the per-slot summaries.
inline Metrics compute_metrics(std::span<const SlotSummary> slots, const World& world) {
  if (slots.empty()) throw std::invalid_argument("no slots to summarise");
  Metrics m;
  std::uint64_t deliveries = 0, secure = 0, priced = 0;
  double q1 = 0, q2 = 0, ug = 0, up = 0;
  std::array<double, 3> rep{};
  std::vector<double> qocs_series;
  qocs_series.reserve(slots.size());
  for (const auto& s : slots) {
    deliveries += s.deliveries;
    secure += s.secure_deliveries;
    priced += s.priced_contents;
    q1 += s.avg_q1 * s.priced_contents;
    q2 += s.avg_q2 * s.priced_contents;
    ug += s.avg_group_utility * s.priced_contents;
    up += s.avg_publisher_utility * s.priced_contents;
    for (std::size_t p = 0; p < 3; ++p) rep[p] += s.avg_reputation[p];
    qocs_series.push_back(s.avg_qocs);
  }
  m.secure_pubsub_ratio = deliveries == 0 ? 1.0 : static_cast<double>(secure) / deliveries;
  if (priced > 0) {
    m.avg_qocs = {q1 / priced, q2 / priced};
    m.avg_group_utility = ug / priced;
    m.avg_publisher_utility = up / priced;
  }
  for (auto p : {BehaviorProfile::kLegitimate, BehaviorProfile::kSpeculative,
                 BehaviorProfile::kMalicious}) {
    if (world.count(p) > 0) m.avg_reputation_by_profile[p] = rep[profile_index(p)] / slots.size();
  }
  m.convergence_slot = convergence_slot(qocs_series);
  return m;
}

class Episode {
 public:
  Episode(const World& world, SchemeConfig scheme, ModelParams model = {})
      : world_(world), scheme_(std::move(scheme)), model_(std::move(model)),
        ledger_(with_time_scale(scheme_.trust, world.cfg)), states_(world.initial_states),
        acting_honest_(world.vehicles.size(), true) {
    for (const auto& v : world_.vehicles) ledger_.add_vehicle(v.id, v.role_index);
    const Rng root(static_cast<std::uint64_t>(world_.cfg.rng_seed));
    for (std::size_t v = 0; v < world_.vehicles.size(); ++v) {
      behaviour_rng_.push_back(root.fork(detail::kBehaviour, v + 1));
      publish_rng_.push_back(root.fork(detail::kPublish, v));
      subscribe_rng_.push_back(root.fork(detail::kSubscribe, v));
      report_rng_.push_back(root.fork(detail::kReport, v));
    }
    for (const auto& f : world_.fleets) {
      auto b = std::make_unique<Broker>(f.broker_buffer_bytes,
                                        static_cast<std::uint64_t>(world_.cfg.retention_window_slots));
      for (int g = 0; g < world_.cfg.num_sensor_types; ++g) {
        const TopicId topic = topic_for(f.id, SensorType(static_cast<std::uint32_t>(g)));
        b->add_topic(topic);
        for (auto m : f.member_ids) {
          b->register_publisher(topic, m);
          b->follow_topic(topic, m);
        }
      }
      brokers_.push_back(std::move(b));
      learner_rng_.push_back(root.fork(detail::kLearner, f.id.value));
      zipf_norm_.push_back(zipf_normalizer(
          {model_.zipf_exponent, static_cast<std::uint32_t>(f.member_ids.size())}));
      memory_.emplace_back();
      if (scheme_.pricing == SchemeConfig::Pricing::kLearned)
        learners_.push_back(std::make_unique<LearnerPair>(model_.grid, model_.learner, model_.learner));
    }
    game_cfg_.grid = model_.grid;
    game_cfg_.subscriber = game_cfg_.publisher = model_.learner;
    game_cfg_.epsilon = model_.epsilon;
    game_cfg_.fixed_price = model_.fixed_price;
  }

  const ReputationLedger& ledger() const { return ledger_; }
  const std::vector<VehicleState>& states() const { return states_; }

  EpisodeResult run(const EpisodeOptions& opt = {}) {
    const int slots = opt.slots.value_or(world_.cfg.num_time_slots);
    EpisodeResult result;
    result.slots.reserve(static_cast<std::size_t>(slots));
    for (int t = 0; t < slots; ++t) result.slots.push_back(step(static_cast<std::uint64_t>(t), opt, result));
    result.metrics = compute_metrics(result.slots, world_);
    return result;
  }

 private:
  static TrustParams with_time_scale(TrustParams p, const ScenarioConfig& cfg) {
    p.time_per_slot = cfg.trust_time_per_slot;
    return p;
  }

  static TopicId topic_for(FleetId f, SensorType g) { return TopicId(f.value * 64u + g.value); }

  bool acts_honestly(const Cav& v) {
    switch (v.profile) {
      case BehaviorProfile::kLegitimate: return true;
      case BehaviorProfile::kMalicious: return false;
      case BehaviorProfile::kSpeculative:
        return behaviour_rng_[v.id.value].bernoulli(world_.cfg.speculative_honest_prob);
    }
    return true;
  }

  SlotSummary step(std::uint64_t t, const EpisodeOptions& opt, EpisodeResult& result) {
    const TimeSlot slot{t, world_.cfg.slot_length_s};
    SlotSummary sum;
    sum.slot = t;

    // Mobility: fleets cruise in formation.
    for (auto& s : states_) s = step_bicycle(s, ControlInput{}, BodyGeometry{}, slot.slot_length_s);

    // Reputation snapshot at the start of the slot.
    auto& rep = rep_;
    rep.assign(world_.vehicles.size(), 1.0);
    std::array<double, 3> rep_sum{};
    std::array<std::size_t, 3> rep_n{};
    for (const auto& v : world_.vehicles) {
      const double r = ledger_.reputation(v.id, t);
      rep[v.id.value] = r;
      rep_sum[profile_index(v.profile)] += r;
      ++rep_n[profile_index(v.profile)];
    }
    for (std::size_t p = 0; p < 3; ++p) sum.avg_reputation[p] = rep_n[p] ? rep_sum[p] / rep_n[p] : 0.0;

    for (const auto& v : world_.vehicles) acting_honest_[v.id.value] = acts_honestly(v);

    const double threshold = scheme_.reputation_enabled ? world_.cfg.reputation_threshold : 0.0;
    struct PendingReport {
      VehicleId reporter, accused;
      ContentId content;
    };
    std::vector<PendingReport> reports;
    double q1 = 0, q2 = 0, qa = 0, pa = 0, ug = 0, up = 0;

    for (const auto& fleet : world_.fleets) {
      auto& broker = *brokers_[fleet.id.value];
      broker.advance(t);
      const auto n = fleet.member_ids.size();
      const PopularityParams pop{model_.zipf_exponent, static_cast<std::uint32_t>(n)};
      std::vector<std::uint32_t> ranks(n);
      std::iota(ranks.begin(), ranks.end(), 1u);
      {
        Rng& r = publish_rng_[fleet.master_id.value];
        std::shuffle(ranks.begin(), ranks.end(), r.engine());
      }

      for (std::size_t i = 0; i < n; ++i) {
        const Cav& pub = world_.vehicle(fleet.member_ids[i]);
        Rng& prng = publish_rng_[pub.id.value];
        Content c;
        c.id = ContentId(next_content_++);
        c.publisher_id = pub.id;
        c.sensor_type = SensorType(static_cast<std::uint32_t>(
            prng.below(static_cast<std::uint64_t>(world_.cfg.num_sensor_types))));
        c.topic_id = topic_for(fleet.id, c.sensor_type);
        c.raw_size_bytes = static_cast<std::uint64_t>(prng.uniform(model_.raw_size_mb) * kBytesPerMB);
        c.result_size_bytes =
            static_cast<std::uint64_t>(prng.uniform(model_.result_size_kb) * kBytesPerKB);
        c.popularity_rank = ranks[i];
        const double satisfaction = prng.uniform(model_.satisfaction_range);
        c.ground_truth_honest = acting_honest_[pub.id.value];

        const Metadata meta =
            build_metadata(c, pub, slot, broker.next_multicast_address(), signer_);
        broker.publish(c.id, c.topic_id, meta, t);

        const double r_pub = scheme_.reputation_enabled ? rep[pub.id.value] : 1.0;
        auto& accepted = accepted_;
        accepted.clear();
        for (auto sid : fleet.member_ids) {
          if (sid == pub.id) continue;
          Rng& srng = subscribe_rng_[sid.value];
          const bool wants = srng.bernoulli(world_.cfg.subscribe_prob);
          const bool prefers_raw = srng.bernoulli(0.5);
          if (!wants) continue;
          if (broker.subscribe({sid, c.id, prefers_raw}, r_pub, threshold)) accepted.push_back(sid);
        }
        if (accepted.empty()) continue;

        const auto& group = broker.group(c.id);
        GameInstance inst;
        inst.group = group.size();
        inst.econ = model_.econ;
        inst.econ.satisfaction_coeff = satisfaction;
        inst.econ.raw_cost_param = world_.costs[pub.id.value].raw.at(c.sensor_type);
        inst.econ.result_cost_param = world_.costs[pub.id.value].result;
        inst.caps = capacities_of(pub, c.sensor_type);
        inst.caps.sensing = std::max(inst.caps.sensing, 1e-6);
        inst.caps.processing = std::max(inst.caps.processing, 1e-6);
        inst.popularity = zipf_popularity(c.popularity_rank, pop, zipf_norm_[fleet.id.value]);
        inst.reputation = r_pub;
        inst.delay = delay_vector(c, model_.channel);
        double far = 1.0;
        for (auto sid : accepted)
          far = std::max(far, pairwise_distance(states_[pub.id.value], states_[sid.value]));
        inst.energy = energy_cost(c, far, model_.channel);

        PriceVector price;
        QoCSVector qocs;
        double u_group = 0.0, u_pub = 0.0;
        switch (scheme_.pricing) {
          case SchemeConfig::Pricing::kStatic: {
            const auto e = solve_se(inst);
            price = e.price;
            qocs = e.qocs;
            break;
          }
          case SchemeConfig::Pricing::kFixed: {
            const auto e = fixed_price_outcome(inst, model_.fixed_price);
            price = e.price;
            qocs = e.qocs;
            break;
          }
          case SchemeConfig::Pricing::kLearned: {
            const auto row = play_slot(game_cfg_, inst, scheme_.learner, learners_[fleet.id.value].get(),
                                       memory_[fleet.id.value], t, learner_rng_[fleet.id.value]);
            price = row.price;
            qocs = row.qocs;
            break;
          }
        }
        u_group = leader_utility(inst, price, qocs);
        u_pub = follower_utility(inst, price, qocs);
        const double paid = group_payment(inst.group, qocs, price, inst.econ);
        const double earned = publisher_revenue({inst.group, qocs, price, inst.caps, inst.energy}, inst.econ);
        sum.payments += paid;
        sum.revenue += earned;

        ++sum.priced_contents;
        q1 += qocs.raw;
        q2 += qocs.result;
        qa += mean_active_qocs(inst, qocs);
        pa += (price.raw + price.result) / 2.0;
        ug += u_group;
        up += u_pub;

        for (auto sid : accepted) {
          ++sum.deliveries;
          if (c.ground_truth_honest) ++sum.secure_deliveries;
          if (scheme_.reputation_enabled && r_pub < threshold) ++result.gating_violations;
          if (opt.keep_deliveries)
            result.deliveries.push_back({t, c.id, pub.id, sid, c.ground_truth_honest, r_pub, threshold});
          const bool silent = world_.cfg.honest_reporters_only && !acting_honest_[sid.value];
          if (!c.ground_truth_honest && !silent &&
              report_rng_[sid.value].bernoulli(world_.cfg.report_prob))
            reports.push_back({sid, pub.id, c.id});
        }
      }
    }

    // Forensics on the slot's reports.
    for (const auto& r : reports) {
      const bool verdict = report_rng_[r.accused.value].bernoulli(world_.cfg.detection_prob);
      if (!verdict) continue;
      const auto before = ledger_.record(r.accused).misbehavior_slots.size();
      ledger_.record_report(r.reporter, r.accused, r.content, t, true);
      if (ledger_.record(r.accused).misbehavior_slots.size() != before) ++sum.detections;
    }
    if (sum.detections > 0 && !result.first_detection_slot) result.first_detection_slot = t;

    if (sum.priced_contents > 0) {
      const double n = static_cast<double>(sum.priced_contents);
      sum.avg_q1 = q1 / n;
      sum.avg_q2 = q2 / n;
      sum.avg_qocs = qa / n;
      sum.avg_price = pa / n;
      sum.avg_group_utility = ug / n;
      sum.avg_publisher_utility = up / n;
    }
    result.max_payment_imbalance =
        std::max(result.max_payment_imbalance, std::abs(sum.payments - sum.revenue));
    return sum;
  }

  const World& world_;
  SchemeConfig scheme_;
  ModelParams model_;
  ReputationLedger ledger_;
  std::vector<VehicleState> states_;
  std::vector<bool> acting_honest_;
  std::vector<double> rep_;
  std::vector<VehicleId> accepted_;
  std::vector<double> zipf_norm_;
  std::vector<Rng> behaviour_rng_, publish_rng_, subscribe_rng_, report_rng_, learner_rng_;
  std::vector<std::unique_ptr<Broker>> brokers_;
  std::vector<std::unique_ptr<LearnerPair>> learners_;
  std::vector<GameMemory> memory_;
  DynamicGameConfig game_cfg_;
  MockSigner signer_;
  std::uint32_t next_content_ = 0;
};

inline EpisodeResult run_episode(const World& world, const SchemeConfig& scheme,
                                 const ModelParams& model = {}, const EpisodeOptions& opt = {}) {
  Episode e(world, scheme, model);
  return e.run(opt);
}

// --- scheme comparison ---------------------------------------------------------

struct ComparisonRow {
  Scheme scheme;
  int repetition = 0;
  std::int64_t seed = 0;
  Metrics metrics;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MetricSummary summarize(std::span<const double> xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / (xs.size() - 1));
  }
  return s;
}

inline std::vector<ComparisonRow> compare_schemes(const ScenarioConfig& cfg,
                                                  std::span<const Scheme> schemes, int repetitions,
                                                  const ModelParams& model = {},
                                                  const EpisodeOptions& opt = {}) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  std::vector<ComparisonRow> rows;
  for (int r = 0; r < repetitions; ++r) {
    ScenarioConfig c = cfg;
    c.rng_seed = cfg.rng_seed + r;
    const World w = generate_scenario(c, model);
    for (auto s : schemes) {
      rows.push_back({s, r, c.rng_seed, run_episode(w, make_scheme_config(s, w, model), model, opt).metrics});
    }
  }
  return rows;
}

inline void write_metrics_header(std::ostream& os) {
  os << "scheme,repetition,seed,secure_pubsub_ratio,avg_q1,avg_q2,avg_group_utility,"
        "avg_publisher_utility,rep_legitimate,rep_speculative,rep_malicious,convergence_slot\n";
}

inline void write_metrics_row(std::ostream& os, const ComparisonRow& r) {
  auto rep = [&](BehaviorProfile p) {
    auto it = r.metrics.avg_reputation_by_profile.find(p);
    return it == r.metrics.avg_reputation_by_profile.end() ? std::string() : std::to_string(it->second);
  };
  os << to_string(r.scheme) << ',' << r.repetition << ',' << r.seed << ','
     << r.metrics.secure_pubsub_ratio << ',' << r.metrics.avg_qocs[0] << ','
     << r.metrics.avg_qocs[1] << ',' << r.metrics.avg_group_utility << ','
     << r.metrics.avg_publisher_utility << ',' << rep(BehaviorProfile::kLegitimate) << ','
     << rep(BehaviorProfile::kSpeculative) << ',' << rep(BehaviorProfile::kMalicious) << ','
     << (r.metrics.convergence_slot ? std::to_string(*r.metrics.convergence_slot) : std::string())
     << '\n';
}

inline void write_slot_header(std::ostream& os) {
  os << "slot,rep_legitimate,rep_speculative,rep_malicious,deliveries,secure_deliveries,"
        "avg_q,avg_price,avg_group_utility,avg_publisher_utility\n";
}

inline void write_slot_rows(std::ostream& os, std::span<const SlotSummary> slots) {
  for (const auto& s : slots) {
    os << s.slot << ',' << s.avg_reputation[0] << ',' << s.avg_reputation[1] << ','
       << s.avg_reputation[2] << ',' << s.deliveries << ',' << s.secure_deliveries << ','
       << s.avg_qocs << ',' << s.avg_price << ',' << s.avg_group_utility << ','
       << s.avg_publisher_utility << '\n';
  }
}

}  // namespace spad
