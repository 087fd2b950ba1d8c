#include <gtest/gtest.h>

#include <cmath>

#include "spad/stackelberg.hpp"

using namespace spad;

namespace {

// Raw part only: J=2, alpha=28, f=1, R=0.8, xi=1, eps=0.4, sc=0.75, theta=0.75.
GameInstance worked_instance() {
  GameInstance g;
  g.group = {2, 0};
  g.econ.satisfaction_coeff = 28;
  g.econ.raw_cost_param = 0.4;
  g.caps = {0.75, 0.6};
  g.popularity = 1.0;
  g.reputation = 0.8;
  return g;
}

GameInstance random_instance(Rng& rng) {
  GameInstance g;
  g.group = {static_cast<int>(rng.below(11)), static_cast<int>(rng.below(11))};
  if (g.group.total() == 0) g.group.raw = 1;
  g.econ.satisfaction_coeff = rng.uniform(25, 45);
  g.econ.raw_cost_param = rng.uniform(0.4, 2.0);
  g.econ.result_cost_param = rng.uniform(0.4, 2.0);
  g.caps = {rng.uniform(0.01, 1), rng.uniform(0.01, 1)};
  const auto catalog = static_cast<std::uint32_t>(1 + rng.below(20));
  g.popularity = zipf_popularity(static_cast<std::uint32_t>(1 + rng.below(catalog)), {0.9, catalog});
  g.reputation = rng.uniform(0.45, 1);
  return g;
}

}  // namespace

TEST(BestResponse, Examples) {
  const auto g = worked_instance();
  EXPECT_EQ(best_response_part(g, 0, 0.0), 0.0);
  EXPECT_NEAR(best_response_part(g, 0, 0.2), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(best_response_part(g, 0, 0.4), 1.0);
  EXPECT_DOUBLE_EQ(best_response_part(g, 0, 3.0), 1.0);
  EXPECT_EQ(best_response_part(g, 1, 3.0), 0.0);  // no result subscribers
}

TEST(BestResponse, ContinuousAtThreshold) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_instance(rng);
    for (int u = 0; u < 2; ++u) {
      if (g.group[u] == 0) continue;
      const double threshold = detail::saturation_price(g, u);
      const double interior =
          g.group[u] * g.econ.price_adjust[u] * threshold / (2 * g.cost_scale(u) * g.caps[u]);
      ASSERT_NEAR(interior, 1.0, 1e-12);
      ASSERT_EQ(best_response_part(g, u, threshold), 1.0);
      ASSERT_NEAR(best_response_part(g, u, std::nextafter(threshold, 0.0)), 1.0, 1e-12);
    }
  }
}

TEST(BestResponse, DegenerateCapacity) {
  auto g = worked_instance();
  g.caps.sensing = 0.0;
  EXPECT_THROW(best_response_part(g, 0, 1.0), std::domain_error);
  EXPECT_THROW(optimal_price_part(g, 0), std::domain_error);
}

TEST(BestResponse, MaximisesFollowerOnFineGrid) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_instance(rng);
    const PriceVector p{rng.uniform(0, 5), rng.uniform(0, 5)};
    const auto br = best_response_qocs(p, g);
    const double best = follower_utility(g, p, br);
    for (int k = 0; k <= 200; ++k) {
      for (int u = 0; u < 2; ++u) {
        QoCSVector q = br;
        q[u] = k / 200.0;
        ASSERT_LE(follower_utility(g, p, q), best + 1e-12);
      }
    }
  }
}

TEST(OptimalPrice, WorkedHighPaymentCase) {
  const auto g = worked_instance();
  EXPECT_NEAR(detail::case_indicator(g, 0), 42.0, 1e-12);
  EXPECT_EQ(price_case(g, 0), PartCase::kHighPayment);
  EXPECT_NEAR(optimal_price_part(g, 0), 0.4, 1e-15);
  EXPECT_EQ(price_case(g, 1), PartCase::kInactive);
  EXPECT_EQ(optimal_price_part(g, 1), 0.0);
}

TEST(OptimalPrice, InteriorCaseMatchesOracle) {
  GameInstance g;
  g.group = {1, 0};
  g.econ.satisfaction_coeff = 1;
  g.econ.raw_cost_param = 2;
  g.caps = {0.5, 0.5};
  g.popularity = 0.5;
  g.reputation = 0.5;
  EXPECT_LT(detail::case_indicator(g, 0), 0.0);
  EXPECT_EQ(price_case(g, 0), PartCase::kInterior);
  // Upsilon = 4 + 0.25 * 2 * 0.5 = 4.25, p* = (sqrt(4.25) - 2) / 0.75.
  const double expected = (std::sqrt(4.25) - 2.0) / 0.75;
  EXPECT_NEAR(optimal_price_part(g, 0), expected, 1e-15);
  const auto oracle = solve_brute_force(g, 1000);
  EXPECT_NEAR(oracle.price.raw, expected, g.econ.price_cap / 1000);
}

TEST(OptimalPrice, NoSatisfactionMeansNoPayment) {
  auto g = worked_instance();
  g.reputation = 0.0;
  EXPECT_EQ(price_case(g, 0), PartCase::kInterior);
  EXPECT_NEAR(optimal_price_part(g, 0), 0.0, 1e-15);
}

TEST(OptimalPrice, ClampedToCap) {
  auto g = worked_instance();
  g.group.raw = 1;
  g.econ.price_adjust[0] = 0.01;
  g.econ.raw_cost_param = 2.0;
  g.caps.sensing = 1.0;
  g.econ.satisfaction_coeff = 45;
  ASSERT_GT(detail::saturation_price(g, 0), g.econ.price_cap);
  EXPECT_EQ(optimal_price_part(g, 0), g.econ.price_cap);
  const auto e = solve_se(g);
  EXPECT_NEAR(e.qocs.raw, best_response_part(g, 0, g.econ.price_cap), 1e-15);
}

TEST(SolveSe, WorkedEquilibrium) {
  const auto e = solve_se(worked_instance());
  EXPECT_NEAR(e.price.raw, 0.4, 1e-15);
  EXPECT_EQ(e.qocs.raw, 1.0);
  EXPECT_EQ(e.cases[0], PartCase::kHighPayment);
  EXPECT_EQ(e.qocs.result, 0.0);
}

TEST(SolveSe, ClosedFormEqualsComposition) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto g = random_instance(rng);
    const auto e = solve_se(g);
    const auto p = optimal_price(g);
    const auto q = best_response_qocs(p, g);
    for (int u = 0; u < 2; ++u) {
      ASSERT_EQ(e.price[u], p[u]);
      ASSERT_NEAR(e.qocs[u], q[u], 1e-12);
      ASSERT_GE(e.qocs[u], 0.0);
      ASSERT_LE(e.qocs[u], 1.0);
      ASSERT_GE(e.price[u], 0.0);
      ASSERT_LE(e.price[u], g.econ.price_cap);
    }
  }
}

TEST(SolveSe, SymmetricPartsGiveEqualOutcome) {
  auto g = worked_instance();
  g.group = {3, 3};
  g.econ.result_cost_param = g.econ.raw_cost_param;
  g.caps = {0.6, 0.6};
  const auto e = solve_se(g);
  EXPECT_EQ(e.price.raw, e.price.result);
  EXPECT_EQ(e.qocs.raw, e.qocs.result);
}

TEST(SolveSe, RejectsInvalidInstances) {
  auto g = worked_instance();
  g.group = {0, 0};
  EXPECT_THROW(solve_se(g), std::invalid_argument);
  g = worked_instance();
  g.reputation = 1.5;
  EXPECT_THROW(solve_se(g), std::invalid_argument);
  g = worked_instance();
  g.popularity = 0;
  EXPECT_THROW(solve_se(g), std::invalid_argument);
}

TEST(BruteForce, WorkedInstanceWithinOneCell) {
  const auto g = worked_instance();
  const auto e = solve_brute_force(g, 1000);
  EXPECT_NEAR(e.price.raw, 0.4, g.econ.price_cap / 1000);
  EXPECT_NEAR(e.qocs.raw, 1.0, 1.0 / 1000);
  EXPECT_THROW(solve_brute_force(g, 99), std::invalid_argument);
}

// The grid follower quantizes quality, so near a flat interior optimum the grid
// price can sit several cells away. Judge it by the leader's utility instead,
// with the publisher answering exactly.
TEST(BruteForce, ExactResponseLossVanishes) {
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto g = random_instance(rng);
    const auto se = solve_se(g);
    const double best = leader_utility(g, se.price, se.qocs);
    double loss = INFINITY;
    for (int n : {200, 1000, 4000}) {
      const auto bf = solve_brute_force(g, n);
      loss = best - leader_utility(g, bf.price, best_response_qocs(bf.price, g));
      ASSERT_GE(loss, -1e-9) << i << " n=" << n;
    }
    ASSERT_LE(loss, 1e-3 * std::max(1.0, std::abs(best))) << i;
  }
}

TEST(ComparativeStatics, CostRaisesPriceLowersQuality) {
  auto g = worked_instance();
  g.group = {2, 0};
  double prev_p = -1, prev_q = 2;
  for (double eps = 0.4; eps <= 2.0 + 1e-12; eps += 0.05) {
    g.econ.raw_cost_param = eps;
    const auto e = solve_se(g);
    ASSERT_GE(e.price.raw, prev_p - 1e-12) << eps;
    ASSERT_LE(e.qocs.raw, prev_q + 1e-12) << eps;
    prev_p = e.price.raw;
    prev_q = e.qocs.raw;
  }
}

TEST(ComparativeStatics, NonDecreasingInReputationAndPopularity) {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    auto g = random_instance(rng);
    const auto base = solve_se(g);
    auto more_rep = g;
    more_rep.reputation = std::min(1.0, g.reputation + rng.uniform(0, 0.3));
    auto more_pop = g;
    more_pop.popularity = std::min(1.0, g.popularity * rng.uniform(1, 3));
    for (const auto& h : {more_rep, more_pop}) {
      const auto e = solve_se(h);
      for (int u = 0; u < 2; ++u) {
        if (g.group[u] == 0) continue;
        // The high-payment price does not depend on R or f; only the interior branch moves.
        ASSERT_GE(e.qocs[u], base.qocs[u] - 1e-12);
        if (e.cases[u] == base.cases[u]) {
          ASSERT_GE(e.price[u], base.price[u] - 1e-12);
        }
      }
    }
  }
}

TEST(Equilibrium, NoProfitableGridDeviation) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto g = random_instance(rng);
    const auto e = solve_se(g);
    const double lead = leader_utility(g, e.price, e.qocs);
    const double follow = follower_utility(g, e.price, e.qocs);
    for (int u = 0; u < 2; ++u) {
      if (g.group[u] == 0) continue;
      for (int k = 0; k <= 500; ++k) {
        PriceVector p = e.price;
        p[u] = g.econ.price_cap * k / 500;
        // The leader anticipates the follower's response.
        ASSERT_LE(leader_utility(g, p, best_response_qocs(p, g)), lead + 1e-9);
        QoCSVector q = e.qocs;
        q[u] = k / 500.0;
        ASSERT_LE(follower_utility(g, e.price, q), follow + 1e-9);
      }
    }
  }
}

TEST(FixedPrice, TablePriceUsesBestResponse) {
  const auto g = worked_instance();
  const auto fp = fixed_price_outcome(g, {1.2, 1.2});
  EXPECT_EQ(fp.price.raw, 1.2);
  EXPECT_EQ(fp.price.result, 0.0);
  EXPECT_EQ(fp.qocs.raw, best_response_part(g, 0, 1.2));
  const auto zero = fixed_price_outcome(g, {0, 0});
  EXPECT_EQ(zero.qocs.raw, 0.0);
}

TEST(FixedPrice, DominatedBySe) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto g = random_instance(rng);
    const auto se = solve_se(g);
    const auto fp = fixed_price_outcome(g, {1.2, 1.2});
    ASSERT_GE(leader_utility(g, se.price, se.qocs),
              leader_utility(g, fp.price, fp.qocs) - 1e-9);
  }
}

TEST(PartCase, Names) {
  EXPECT_EQ(to_string(PartCase::kHighPayment), "HIGH_PAYMENT");
  EXPECT_EQ(to_string(PartCase::kInterior), "INTERIOR");
  EXPECT_EQ(to_string(PartCase::kInactive), "INACTIVE");
}
