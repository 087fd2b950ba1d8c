#pragma once

// Static pub/sub game: the subscriber group leads with a payment vector, the
// publisher follows with a quality vector. Closed-form equilibrium plus a
// brute-force backward-induction solver used as an oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "spad/channel.hpp"
#include "spad/economics.hpp"

namespace spad {

struct GameInstance {
  GroupSize group;
  EconParams econ;
  Capacities caps;
  double popularity = 1.0;
  double reputation = 1.0;
  DelayVector delay{};    // constant in the strategies; only shifts utilities
  EnergyCost energy{};

  double cost_scale(int part) const { return econ.cost_adjust[part] * econ.cost_param(part); }
  double gain(int) const {
    return econ.satisfaction_coeff * popularity * reputation;
  }
};

inline void validate(const GameInstance& g) {
  if (g.group.raw < 0 || g.group.result < 0) throw std::invalid_argument("negative group size");
  if (g.group.total() == 0) throw std::invalid_argument("game needs at least one subscriber");
  validate(g.econ);
  if (g.reputation < 0 || g.reputation > 1) throw std::invalid_argument("reputation outside [0,1]");
  if (!(g.popularity > 0) || g.popularity > 1)
    throw std::invalid_argument("popularity outside (0,1]");
  for (int u = 0; u < 2; ++u) {
    if (g.caps[u] < 0 || g.caps[u] > 1) throw std::invalid_argument("capacity outside [0,1]");
  }
}

enum class PartCase { kHighPayment, kInterior, kInactive };

struct Equilibrium {
  PriceVector price;
  QoCSVector qocs;
  std::array<PartCase, 2> cases{PartCase::kInactive, PartCase::kInactive};
};

inline std::string_view to_string(PartCase c) {
  switch (c) {
    case PartCase::kHighPayment: return "HIGH_PAYMENT";
    case PartCase::kInterior: return "INTERIOR";
    case PartCase::kInactive: return "INACTIVE";
  }
  return "?";
}

namespace detail {

inline void require_capacity(const GameInstance& g, int u) {
  if (g.group[u] > 0 && g.caps[u] <= 0.0)
    throw std::domain_error("degenerate capacity for a subscribed part");
}

// Payment at which the follower's best response reaches full quality.
inline double saturation_price(const GameInstance& g, int u) {
  return 2.0 * g.cost_scale(u) * g.caps[u] / (g.group[u] * g.econ.price_adjust[u]);
}

inline double case_indicator(const GameInstance& g, int u) {
  return g.group[u] * g.gain(u) - 4.0 * g.cost_scale(u) * (g.caps[u] + 1.0);
}

inline double upsilon(const GameInstance& g, int u) {
  const double omega = g.cost_scale(u);
  return omega * omega + g.group[u] * g.gain(u) * omega * g.caps[u];
}

}  // namespace detail

inline double best_response_part(const GameInstance& g, int u, double price) {
  if (g.group[u] == 0) return 0.0;
  detail::require_capacity(g, u);
  const double threshold = detail::saturation_price(g, u);
  if (price >= threshold) return 1.0;
  return g.group[u] * g.econ.price_adjust[u] * price / (2.0 * g.cost_scale(u) * g.caps[u]);
}

inline QoCSVector best_response_qocs(const PriceVector& price, const GameInstance& g) {
  return {best_response_part(g, 0, price.raw), best_response_part(g, 1, price.result)};
}

inline PartCase price_case(const GameInstance& g, int u) {
  if (g.group[u] == 0) return PartCase::kInactive;
  return detail::case_indicator(g, u) >= 0.0 ? PartCase::kHighPayment : PartCase::kInterior;
}

inline double optimal_price_part(const GameInstance& g, int u) {
  if (g.group[u] == 0) return 0.0;
  detail::require_capacity(g, u);
  const double p = price_case(g, u) == PartCase::kHighPayment
                       ? detail::saturation_price(g, u)
                       : (std::sqrt(detail::upsilon(g, u)) - g.cost_scale(u)) /
                             (g.group[u] * g.econ.price_adjust[u]);
  return std::clamp(p, 0.0, g.econ.price_cap);
}

inline PriceVector optimal_price(const GameInstance& g) {
  return {optimal_price_part(g, 0), optimal_price_part(g, 1)};
}

// Quality at the equilibrium from the closed form; falls back to the best
// response when the price cap binds.
inline double equilibrium_qocs_part(const GameInstance& g, int u, double price) {
  switch (price_case(g, u)) {
    case PartCase::kInactive: return 0.0;
    case PartCase::kHighPayment:
      if (price >= detail::saturation_price(g, u)) return 1.0;
      break;
    case PartCase::kInterior: {
      const double omega = g.cost_scale(u);
      const double unclamped = (std::sqrt(detail::upsilon(g, u)) - omega) /
                               (g.group[u] * g.econ.price_adjust[u]);
      if (unclamped <= g.econ.price_cap)
        return (std::sqrt(detail::upsilon(g, u)) - omega) / (2.0 * omega * g.caps[u]);
      break;
    }
  }
  return best_response_part(g, u, price);
}

inline Equilibrium solve_se(const GameInstance& g) {
  validate(g);
  Equilibrium e;
  e.price = optimal_price(g);
  for (int u = 0; u < 2; ++u) {
    e.qocs[u] = equilibrium_qocs_part(g, u, e.price[u]);
    e.cases[u] = price_case(g, u);
  }
  return e;
}

// Utilities of both sides at a strategy pair, through the economics module.
inline double leader_utility(const GameInstance& g, const PriceVector& p, const QoCSVector& q) {
  return group_utility(g.group, q, p, g.delay, g.caps, g.popularity, g.reputation, g.econ);
}

inline double follower_utility(const GameInstance& g, const PriceVector& p, const QoCSVector& q) {
  const PublisherContentTerm term{g.group, q, p, g.caps, g.energy};
  return publisher_content_utility(term, g.econ);
}

// Backward induction on a uniform grid of grid_n + 1 points per axis. Both
// utilities separate by part, so each part is solved on its own 2-D grid.
inline Equilibrium solve_brute_force(const GameInstance& g, int grid_n) {
  validate(g);
  if (grid_n < 100) throw std::invalid_argument("grid_n must be >= 100");
  Equilibrium e;
  for (int u = 0; u < 2; ++u) {
    e.cases[u] = price_case(g, u);
    if (g.group[u] == 0) continue;
    double best_leader = -INFINITY;
    for (int i = 0; i <= grid_n; ++i) {
      const double p = g.econ.price_cap * i / grid_n;
      double best_follower = -INFINITY;
      double q_best = 0.0;
      for (int k = 0; k <= grid_n; ++k) {
        const double q = static_cast<double>(k) / grid_n;
        const double v = g.group[u] * g.econ.price_adjust[u] * p * q -
                         publisher_part_cost(u, q, g.caps[u], g.econ);
        if (v > best_follower) {
          best_follower = v;
          q_best = q;
        }
      }
      const double lead = group_part_utility(u, g.group[u], q_best, p, g.delay[u], g.caps[u],
                                             g.popularity, g.reputation, g.econ);
      if (lead > best_leader) {
        best_leader = lead;
        e.price[u] = p;
        e.qocs[u] = q_best;
      }
    }
  }
  return e;
}

// Outcome when the subscribers pay a fixed price and the publisher best-responds.
inline Equilibrium fixed_price_outcome(const GameInstance& g, const PriceVector& fixed) {
  validate(g);
  Equilibrium e;
  for (int u = 0; u < 2; ++u) {
    e.cases[u] = price_case(g, u);
    if (g.group[u] == 0) continue;
    e.price[u] = std::clamp(fixed[u], 0.0, g.econ.price_cap);
    e.qocs[u] = best_response_part(g, u, e.price[u]);
  }
  return e;
}

}  // namespace spad
