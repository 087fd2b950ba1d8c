#pragma once

// Kinematic bicycle model. Only the front wheel steers.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spad {

struct VehicleState {
  double x_m = 0.0;
  double y_m = 0.0;
  double velocity_mps = 0.0;
  double heading_rad = 0.0;
};

struct ControlInput {
  double accel_mps2 = 0.0;
  double front_steer_rad = 0.0;
};

struct BodyGeometry {
  double front_axle_to_cg_m = 1.105;
  double rear_axle_to_cg_m = 1.738;
};

// Maps any angle onto (-pi, pi].
inline double normalize_heading(double rad) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(rad, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

inline double slip_angle(const ControlInput& input, const BodyGeometry& geom) {
  if (!(std::abs(input.front_steer_rad) < std::numbers::pi / 2)) {
    throw std::domain_error("front steering angle must satisfy |steer| < pi/2");
  }
  if (geom.front_axle_to_cg_m <= 0.0 || geom.rear_axle_to_cg_m <= 0.0) {
    throw std::domain_error("axle distances must be positive");
  }
  const double lr = geom.rear_axle_to_cg_m;
  return std::atan(lr * std::tan(input.front_steer_rad) / (lr + geom.front_axle_to_cg_m));
}

// One slot of the bicycle model. The lateral update uses sin(heading + slip);
// velocity is clamped at zero since reversing is not modeled.
inline VehicleState step_bicycle(const VehicleState& s, const ControlInput& input,
                                 const BodyGeometry& geom, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("time step must be positive");
  const double psi = slip_angle(input, geom);
  VehicleState next;
  next.x_m = s.x_m + s.velocity_mps * std::cos(s.heading_rad + psi) * dt;
  next.y_m = s.y_m + s.velocity_mps * std::sin(s.heading_rad + psi) * dt;
  next.velocity_mps = std::max(0.0, s.velocity_mps + input.accel_mps2 * dt);
  next.heading_rad = normalize_heading(
      s.heading_rad + s.velocity_mps * std::sin(psi) / geom.rear_axle_to_cg_m * dt);
  return next;
}

inline double pairwise_distance(const VehicleState& a, const VehicleState& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

}  // namespace spad
