#pragma once

// Intra-fleet V2V link: path-loss gain, transmit power, rate, delay, energy.
// All arithmetic is in linear watts; dBm only appears in ChannelParams.

#include <cmath>
#include <stdexcept>

#include "spad/content.hpp"

namespace spad {

enum class PowerMode {
  kFixed,       // constant transmit power at base_power_dbm
  kSinrTarget,  // power needed to reach sinr_target against interference
};

struct ChannelParams {
  double rayleigh_coeff = 1.0;     // |mu_0|
  double pathloss_exponent = 4.0;
  double sinr_target = 100.0;      // linear
  double cochannel_interference = 0.0;  // linear watts
  double base_power_dbm = 23.0;
  double bandwidth_hz = 2e6;
  double noise_power_dbm = -110.0;  // carried for completeness; SINR is fixed at its target
  PowerMode power_mode = PowerMode::kFixed;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

struct DelayVector {
  double raw_s = 0.0;
  double result_s = 0.0;

  double operator[](int part) const { return part == 0 ? raw_s : result_s; }
};

struct EnergyCost {
  double raw = 0.0;
  double result = 0.0;

  double operator[](int part) const { return part == 0 ? raw : result; }
};

inline double channel_gain(double d_m, const ChannelParams& p) {
  if (!(d_m > 0.0)) throw std::domain_error("distance must be positive");
  return p.rayleigh_coeff * p.rayleigh_coeff * std::pow(d_m, -p.pathloss_exponent);
}

inline double transmit_power(double d_m, const ChannelParams& p) {
  if (!(d_m > 0.0)) throw std::domain_error("distance must be positive");
  const double base = dbm_to_watts(p.base_power_dbm);
  if (p.power_mode == PowerMode::kFixed) return base;
  return base + p.sinr_target / (p.rayleigh_coeff * p.rayleigh_coeff) *
                    p.cochannel_interference * std::pow(d_m, p.pathloss_exponent);
}

inline double link_rate(const ChannelParams& p) {
  return p.bandwidth_hz * std::log2(1.0 + p.sinr_target);
}

inline constexpr double bytes_to_bits(std::uint64_t bytes) {
  return 8.0 * static_cast<double>(bytes);
}

inline DelayVector delay_vector(std::uint64_t raw_bytes, std::uint64_t result_bytes,
                                const ChannelParams& p) {
  const double r = link_rate(p);
  if (!(r > 0.0)) throw std::domain_error("link rate must be positive");
  return {bytes_to_bits(raw_bytes) / r, bytes_to_bits(result_bytes) / r};
}

inline DelayVector delay_vector(const Content& c, const ChannelParams& p) {
  return delay_vector(c.raw_size_bytes, c.result_size_bytes, p);
}

inline EnergyCost energy_cost(const DelayVector& delay, double d_m, const ChannelParams& p) {
  const double power = transmit_power(d_m, p);
  return {power * delay.raw_s, power * delay.result_s};
}

inline EnergyCost energy_cost(const Content& c, double d_m, const ChannelParams& p) {
  return energy_cost(delay_vector(c, p), d_m, p);
}

}  // namespace spad
