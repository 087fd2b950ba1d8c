#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spad/core.hpp"
#include "spad/mobility.hpp"

using namespace spad;

namespace {

// Independent single-step evaluator of the four update equations.
struct OracleStep {
  double x, y, v, heading;
};

OracleStep oracle_step(double x, double y, double v, double heading, double accel, double steer,
                       double lf, double lr, double dt) {
  const double psi = std::atan(lr * std::tan(steer) / (lr + lf));
  return {x + v * std::cos(heading + psi) * dt, y + v * std::sin(heading + psi) * dt,
          std::max(0.0, v + accel * dt), heading + v * std::sin(psi) / lr * dt};
}

const BodyGeometry kGeom{1.105, 1.738};

}  // namespace

TEST(SlipAngle, ZeroSteeringGivesZero) {
  EXPECT_EQ(slip_angle({0.0, 0.0}, kGeom), 0.0);
}

TEST(SlipAngle, TableGeometryValue) {
  // atan(1.738 tan 0.1 / 2.843), evaluated independently.
  constexpr double expected = 0.06126045134125219;
  const double oracle = std::atan(1.738 * std::tan(0.1) / (1.738 + 1.105));
  EXPECT_NEAR(oracle, expected, 1e-15);
  EXPECT_NEAR(slip_angle({0.0, 0.1}, kGeom), expected, 1e-15);
  // The rounded published figure agrees to four decimals.
  EXPECT_NEAR(slip_angle({0.0, 0.1}, kGeom), 0.06128, 1e-4);
}

TEST(SlipAngle, OddInSteering) {
  for (double s : {0.01, 0.1, 0.5, 1.2}) {
    EXPECT_DOUBLE_EQ(slip_angle({0.0, -s}, kGeom), -slip_angle({0.0, s}, kGeom));
  }
}

TEST(SlipAngle, RejectsSteeringAtRightAngle) {
  EXPECT_THROW(slip_angle({0.0, std::numbers::pi / 2}, kGeom), std::domain_error);
  EXPECT_THROW(slip_angle({0.0, -2.0}, kGeom), std::domain_error);
  EXPECT_THROW(slip_angle({0.0, 0.1}, BodyGeometry{0.0, 1.0}), std::domain_error);
}

TEST(StepBicycle, StraightLine) {
  const auto s = step_bicycle({3.0, 4.0, 10.0, 0.0}, {}, kGeom, 1.0);
  EXPECT_DOUBLE_EQ(s.x_m, 13.0);
  EXPECT_DOUBLE_EQ(s.y_m, 4.0);
  EXPECT_DOUBLE_EQ(s.velocity_mps, 10.0);
  EXPECT_DOUBLE_EQ(s.heading_rad, 0.0);
}

TEST(StepBicycle, PureAcceleration) {
  const auto s = step_bicycle({0.0, 0.0, 10.0, 0.3}, {2.0, 0.0}, kGeom, 1.0);
  EXPECT_DOUBLE_EQ(s.velocity_mps, 12.0);
  EXPECT_DOUBLE_EQ(s.heading_rad, 0.3);
}

TEST(StepBicycle, VelocityClampedAtZero) {
  const auto s = step_bicycle({0.0, 0.0, 1.0, 0.0}, {-5.0, 0.0}, kGeom, 1.0);
  EXPECT_EQ(s.velocity_mps, 0.0);
}

TEST(StepBicycle, HighwayStepMatchesOracle) {
  const auto o = oracle_step(0, 0, 27.78, 0, 0, 0.05, 1.105, 1.738, 0.1);
  // Frozen from the oracle above.
  EXPECT_NEAR(o.x, 2.7767010045554965, 1e-12);
  EXPECT_NEAR(o.y, 0.08494428350688119, 1e-12);
  EXPECT_NEAR(o.heading, 0.048874731591991474, 1e-12);
  const auto s = step_bicycle({0, 0, 27.78, 0}, {0, 0.05}, kGeom, 0.1);
  EXPECT_NEAR(s.x_m, o.x, 1e-12);
  EXPECT_NEAR(s.y_m, o.y, 1e-12);
  EXPECT_NEAR(s.velocity_mps, o.v, 1e-12);
  EXPECT_NEAR(s.heading_rad, o.heading, 1e-12);
}

TEST(StepBicycle, RandomStepsMatchOracle) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-100, 100), y = rng.uniform(-100, 100);
    const double v = rng.uniform(0, 40), h = rng.uniform(-3, 3);
    const double a = rng.uniform(-3, 3), st = rng.uniform(-1, 1), dt = rng.uniform(0.01, 1);
    const auto o = oracle_step(x, y, v, h, a, st, 1.105, 1.738, dt);
    const auto s = step_bicycle({x, y, v, h}, {a, st}, kGeom, dt);
    ASSERT_NEAR(s.x_m, o.x, 1e-9);
    ASSERT_NEAR(s.y_m, o.y, 1e-9);
    ASSERT_NEAR(s.velocity_mps, o.v, 1e-12);
    ASSERT_NEAR(s.heading_rad, normalize_heading(o.heading), 1e-9);
  }
}

TEST(StepBicycle, RejectsNonPositiveStep) {
  EXPECT_THROW(step_bicycle({}, {}, kGeom, 0.0), std::domain_error);
}

TEST(StepBicycle, ZeroInputPreservesSpeedAndHeading) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const VehicleState s0{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0, 40),
                          rng.uniform(-3, 3)};
    const double dt = rng.uniform(0.01, 1);
    const auto s = step_bicycle(s0, {}, kGeom, dt);
    ASSERT_EQ(s.velocity_mps, s0.velocity_mps);
    ASSERT_NEAR(s.heading_rad, s0.heading_rad, 1e-15);
    ASSERT_NEAR(pairwise_distance(s0, s), s0.velocity_mps * dt, 1e-9);
  }
}

TEST(StepBicycle, MirroredSteeringMirrorsPath) {
  VehicleState left{0, 0, 20, 0}, right{0, 0, 20, 0};
  for (int i = 0; i < 100; ++i) {
    left = step_bicycle(left, {0.5, 0.2}, kGeom, 0.1);
    right = step_bicycle(right, {0.5, -0.2}, kGeom, 0.1);
    ASSERT_NEAR(left.x_m, right.x_m, 1e-9);
    ASSERT_NEAR(left.y_m, -right.y_m, 1e-9);
    ASSERT_NEAR(left.heading_rad, -right.heading_rad, 1e-12);
  }
}

TEST(StepBicycle, FleetSpacingPreservedUnderSharedInput) {
  Rng rng(3);
  std::vector<VehicleState> fleet;
  for (int i = 0; i < 6; ++i) fleet.push_back({i * 12.0, 0.0, 25.0, 0.4});
  std::vector<double> before;
  for (std::size_t i = 1; i < fleet.size(); ++i) before.push_back(pairwise_distance(fleet[i - 1], fleet[i]));
  for (int t = 0; t < 200; ++t) {
    const ControlInput in{rng.uniform(-1, 1), rng.uniform(-0.3, 0.3)};
    for (auto& s : fleet) s = step_bicycle(s, in, kGeom, 0.1);
  }
  for (std::size_t i = 1; i < fleet.size(); ++i)
    EXPECT_NEAR(pairwise_distance(fleet[i - 1], fleet[i]), before[i - 1], 1e-9);
}

TEST(NormalizeHeading, MapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(normalize_heading(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(normalize_heading(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(normalize_heading(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double h = normalize_heading(rng.uniform(-100, 100));
    ASSERT_GT(h, -std::numbers::pi);
    ASSERT_LE(h, std::numbers::pi);
  }
}

TEST(PairwiseDistance, Basics) {
  EXPECT_DOUBLE_EQ(pairwise_distance({0, 0, 0, 0}, {3, 4, 0, 0}), 5.0);
  EXPECT_EQ(pairwise_distance({1, 2, 5, 0}, {1, 2, 9, 1}), 0.0);
}

TEST(PairwiseDistance, SymmetryAndTriangleInequality) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const VehicleState a{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), 0, 0};
    const VehicleState b{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), 0, 0};
    const VehicleState c{rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), 0, 0};
    const double dx = a.x_m - b.x_m, dy = a.y_m - b.y_m;
    ASSERT_NEAR(pairwise_distance(a, b), std::sqrt(dx * dx + dy * dy), 1e-9);
    ASSERT_EQ(pairwise_distance(a, b), pairwise_distance(b, a));
    ASSERT_LE(pairwise_distance(a, c), pairwise_distance(a, b) + pairwise_distance(b, c) + 1e-9);
  }
}
