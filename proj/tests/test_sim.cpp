#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "spad/sim.hpp"

using namespace spad;

namespace {

ScenarioConfig small_config(std::int64_t seed = 3) {
  ScenarioConfig cfg;
  cfg.num_road_segments = 6;
  cfg.num_time_slots = 40;
  cfg.rng_seed = seed;
  return cfg;
}

std::size_t expected_vehicles(const World& w) {
  std::size_t n = 0;
  for (const auto& s : w.segments) n += static_cast<std::size_t>(std::lround(s.length_m / 1000.0 * s.density_per_km));
  return n;
}

}  // namespace

TEST(Scenario, DeterministicForSeed) {
  const auto a = generate_scenario(small_config());
  const auto b = generate_scenario(small_config());
  ASSERT_EQ(a.vehicles.size(), b.vehicles.size());
  for (std::size_t i = 0; i < a.vehicles.size(); ++i) {
    ASSERT_EQ(a.vehicles[i].profile, b.vehicles[i].profile);
    ASSERT_EQ(a.vehicles[i].role_index, b.vehicles[i].role_index);
    ASSERT_EQ(a.initial_states[i].x_m, b.initial_states[i].x_m);
  }
}

TEST(Scenario, DensityAndGeometryHonoured) {
  for (std::int64_t seed = 1; seed <= 10; ++seed) {
    const auto w = generate_scenario(small_config(seed));
    ASSERT_EQ(w.segments.size(), 6u);
    for (const auto& s : w.segments) {
      ASSERT_GE(s.length_m, 20.0);
      ASSERT_LE(s.length_m, 200.0);
      ASSERT_GE(s.density_per_km, 10.0);
      ASSERT_LE(s.density_per_km, 120.0);
    }
    ASSERT_EQ(w.vehicles.size(), expected_vehicles(w));
  }
}

TEST(Scenario, FleetsPartitionVehicles) {
  const auto w = generate_scenario(small_config());
  std::set<std::uint32_t> seen;
  for (const auto& f : w.fleets) {
    ASSERT_FALSE(f.member_ids.empty());
    ASSERT_EQ(f.master_id, f.member_ids.front());
    for (auto id : f.member_ids) {
      ASSERT_TRUE(seen.insert(id.value).second);
      ASSERT_EQ(w.fleet_of[id.value], f.id);
    }
  }
  EXPECT_EQ(seen.size(), w.vehicles.size());
}

TEST(Scenario, BehaviourSharesAndRoleBands) {
  auto cfg = small_config();
  cfg.num_road_segments = 40;
  const auto w = generate_scenario(cfg);
  const double n = static_cast<double>(w.vehicles.size());
  EXPECT_EQ(w.count(BehaviorProfile::kMalicious), static_cast<std::size_t>(std::lround(0.2 * n)));
  EXPECT_EQ(w.count(BehaviorProfile::kSpeculative), static_cast<std::size_t>(std::lround(0.2 * n)));
  ASSERT_EQ(w.role_trust.size(), 10u);
  EXPECT_TRUE(std::is_sorted(w.role_trust.begin(), w.role_trust.end()));
  for (const auto& v : w.vehicles) {
    if (v.profile == BehaviorProfile::kMalicious) {
      ASSERT_LT(v.role_index, 3u);
    }
    if (v.profile == BehaviorProfile::kLegitimate) {
      ASSERT_GE(v.role_index, 7u);
    }
  }
}

TEST(Scenario, NoMaliciousWhenShareIsZero) {
  auto cfg = small_config();
  cfg.behavior_mix = {0.8, 0.2, 0.0};
  EXPECT_EQ(generate_scenario(cfg).count(BehaviorProfile::kMalicious), 0u);
}

TEST(Scenario, InvalidConfigThrows) {
  auto cfg = small_config();
  cfg.num_road_segments = 0;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
}

TEST(Episode, DeterministicForSeed) {
  const auto w = generate_scenario(small_config());
  const auto scheme = make_scheme_config(Scheme::kSpad, w);
  const auto a = run_episode(w, scheme);
  const auto b = run_episode(w, scheme);
  ASSERT_EQ(a.slots.size(), 40u);
  for (std::size_t t = 0; t < a.slots.size(); ++t) {
    ASSERT_EQ(a.slots[t].deliveries, b.slots[t].deliveries);
    ASSERT_EQ(a.slots[t].avg_group_utility, b.slots[t].avg_group_utility);
    ASSERT_EQ(a.slots[t].avg_reputation, b.slots[t].avg_reputation);
  }
  EXPECT_EQ(a.metrics.secure_pubsub_ratio, b.metrics.secure_pubsub_ratio);
}

TEST(Episode, AllLegitimateIsFullySecure) {
  auto cfg = small_config();
  cfg.behavior_mix = {1.0, 0.0, 0.0};
  const auto w = generate_scenario(cfg);
  for (auto s : {Scheme::kSpad, Scheme::kBit, Scheme::kSwr}) {
    const auto r = run_episode(w, make_scheme_config(s, w));
    EXPECT_EQ(r.metrics.secure_pubsub_ratio, 1.0) << to_string(s);
    EXPECT_FALSE(r.first_detection_slot.has_value());
  }
}

TEST(Episode, GatingIsSound) {
  const auto w = generate_scenario(small_config());
  for (auto s : {Scheme::kSpad, Scheme::kBit}) {
    const auto r = run_episode(w, make_scheme_config(s, w), {}, {std::nullopt, true});
    EXPECT_EQ(r.gating_violations, 0u);
    ASSERT_FALSE(r.deliveries.empty());
    for (const auto& d : r.deliveries) ASSERT_GE(d.publisher_reputation, d.threshold);
  }
}

TEST(Episode, PaymentsBalanceRevenue) {
  const auto w = generate_scenario(small_config());
  for (auto s : kAllSchemes) {
    const auto r = run_episode(w, make_scheme_config(s, w));
    EXPECT_LE(r.max_payment_imbalance, 1e-9) << to_string(s);
  }
}

TEST(Episode, BitStartsAtHalf) {
  const auto w = generate_scenario(small_config());
  const auto r = run_episode(w, make_scheme_config(Scheme::kBit, w), {}, {1, false});
  for (double v : r.slots[0].avg_reputation) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Episode, MaliciousDetectedUnderSpad) {
  const auto w = generate_scenario(small_config());
  const auto r = run_episode(w, make_scheme_config(Scheme::kSpad, w));
  ASSERT_TRUE(r.first_detection_slot.has_value());
  const auto& m = r.metrics.avg_reputation_by_profile;
  EXPECT_LT(m.at(BehaviorProfile::kMalicious), m.at(BehaviorProfile::kLegitimate));
}

TEST(Episode, SlotOverride) {
  const auto w = generate_scenario(small_config());
  const auto r = run_episode(w, make_scheme_config(Scheme::kSwr, w), {}, {7, false});
  EXPECT_EQ(r.slots.size(), 7u);
  EXPECT_EQ(r.slots.back().slot, 6u);
}

TEST(Metrics, HandExample) {
  World w;
  Cav a, b;
  a.profile = BehaviorProfile::kLegitimate;
  b.profile = BehaviorProfile::kMalicious;
  w.vehicles = {a, b};
  std::vector<SlotSummary> slots(2);
  slots[0].deliveries = 10;
  slots[0].secure_deliveries = 8;
  slots[0].priced_contents = 2;
  slots[0].avg_q1 = 0.5;
  slots[0].avg_q2 = 0.25;
  slots[0].avg_group_utility = 3.0;
  slots[0].avg_publisher_utility = 1.0;
  slots[0].avg_reputation = {0.8, 0.0, 0.4};
  slots[1].deliveries = 6;
  slots[1].secure_deliveries = 6;
  slots[1].priced_contents = 6;
  slots[1].avg_q1 = 1.0;
  slots[1].avg_q2 = 0.0;
  slots[1].avg_group_utility = 5.0;
  slots[1].avg_publisher_utility = -1.0;
  slots[1].avg_reputation = {1.0, 0.0, 0.2};
  const auto m = compute_metrics(slots, w);
  EXPECT_DOUBLE_EQ(m.secure_pubsub_ratio, 14.0 / 16.0);
  EXPECT_DOUBLE_EQ(m.avg_qocs[0], (0.5 * 2 + 1.0 * 6) / 8);
  EXPECT_DOUBLE_EQ(m.avg_qocs[1], 0.5 / 8);
  EXPECT_DOUBLE_EQ(m.avg_group_utility, (6.0 + 30.0) / 8);
  EXPECT_DOUBLE_EQ(m.avg_publisher_utility, (2.0 - 6.0) / 8);
  EXPECT_DOUBLE_EQ(m.avg_reputation_by_profile.at(BehaviorProfile::kLegitimate), 0.9);
  EXPECT_DOUBLE_EQ(m.avg_reputation_by_profile.at(BehaviorProfile::kMalicious), 0.3);
  EXPECT_FALSE(m.avg_reputation_by_profile.contains(BehaviorProfile::kSpeculative));
  EXPECT_THROW(compute_metrics(std::span<const SlotSummary>(), w), std::invalid_argument);
}

TEST(Metrics, NoDeliveriesMeansRatioOne) {
  World w;
  std::vector<SlotSummary> slots(3);
  EXPECT_EQ(compute_metrics(slots, w).secure_pubsub_ratio, 1.0);
}

TEST(Compare, MatchesIndividualRuns) {
  const auto cfg = small_config(11);
  const std::array<Scheme, 2> schemes{Scheme::kSpad, Scheme::kFixedPrice};
  const auto rows = compare_schemes(cfg, schemes, 2);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) {
    auto c = cfg;
    c.rng_seed = cfg.rng_seed + row.repetition;
    ASSERT_EQ(row.seed, c.rng_seed);
    const auto w = generate_scenario(c);
    const auto direct = run_episode(w, make_scheme_config(row.scheme, w));
    EXPECT_EQ(row.metrics.secure_pubsub_ratio, direct.metrics.secure_pubsub_ratio);
    EXPECT_EQ(row.metrics.avg_group_utility, direct.metrics.avg_group_utility);
  }
  EXPECT_THROW(compare_schemes(cfg, schemes, 0), std::invalid_argument);
}

TEST(Compare, SummaryStatistics) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(summarize(std::vector<double>{}).mean, 0.0);
}

TEST(Csv, MetricsRow) {
  ComparisonRow r{Scheme::kSpad, 1, 7, {}};
  r.metrics.secure_pubsub_ratio = 0.5;
  r.metrics.avg_reputation_by_profile[BehaviorProfile::kMalicious] = 0.25;
  r.metrics.convergence_slot = 12;
  std::ostringstream os;
  write_metrics_header(os);
  write_metrics_row(os, r);
  EXPECT_EQ(os.str(),
            "scheme,repetition,seed,secure_pubsub_ratio,avg_q1,avg_q2,avg_group_utility,"
            "avg_publisher_utility,rep_legitimate,rep_speculative,rep_malicious,convergence_slot\n"
            "SPAD,1,7,0.5,0,0,0,0,,,0.250000,12\n");
}
