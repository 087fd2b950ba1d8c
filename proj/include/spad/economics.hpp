#pragma once

// Utilities of subscribers, subscriber groups and publishers. Prices are in
// cents. Part 0 is the raw sensory data, part 1 the processed result.

#include <array>
#include <cmath>
#include <set>
#include <span>
#include <stdexcept>

#include "spad/channel.hpp"
#include "spad/content.hpp"

namespace spad {

struct EconParams {
  double satisfaction_coeff = 28.0;          // alpha
  std::array<double, 2> price_adjust{0.75, 0.75};
  std::array<double, 2> delay_adjust{0.01, 0.01};
  std::array<double, 2> cost_adjust{1.0, 1.0};
  double raw_cost_param = 0.4;               // per sensor type of the publisher
  double result_cost_param = 0.4;
  double listing_fee = 0.1;                  // paid to the master per content
  double price_cap = 5.0;

  double cost_param(int part) const { return part == 0 ? raw_cost_param : result_cost_param; }
};

inline void validate(const EconParams& p) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  positive(p.satisfaction_coeff, "satisfaction_coeff");
  for (int u = 0; u < 2; ++u) {
    positive(p.price_adjust[u], "price_adjust");
    positive(p.delay_adjust[u], "delay_adjust");
    positive(p.cost_adjust[u], "cost_adjust");
  }
  positive(p.raw_cost_param, "raw_cost_param");
  positive(p.result_cost_param, "result_cost_param");
  positive(p.price_cap, "price_cap");
  if (p.listing_fee < 0.0) throw std::invalid_argument("listing_fee must be >= 0");
}

struct PriceVector {
  double raw = 0.0;
  double result = 0.0;

  double operator[](int part) const { return part == 0 ? raw : result; }
  double& operator[](int part) { return part == 0 ? raw : result; }
  friend bool operator==(const PriceVector&, const PriceVector&) = default;
};

// J^1 and J^2: subscribers of the raw part and of the result part.
struct GroupSize {
  int raw = 0;
  int result = 0;

  int operator[](int part) const { return part == 0 ? raw : result; }
  int total() const { return raw + result; }
};

struct SubscriberGroup {
  ContentId content_id;
  std::set<VehicleId> raw_subscribers;
  std::set<VehicleId> result_subscribers;
  double reputation_threshold = 0.45;

  GroupSize size() const {
    return {static_cast<int>(raw_subscribers.size()),
            static_cast<int>(result_subscribers.size())};
  }
  bool empty() const { return raw_subscribers.empty() && result_subscribers.empty(); }
  bool contains(VehicleId id) const {
    return raw_subscribers.contains(id) || result_subscribers.contains(id);
  }
  void add(VehicleId id, bool prefers_raw) {
    if (contains(id)) throw std::invalid_argument("subscriber already in group");
    (prefers_raw ? raw_subscribers : result_subscribers).insert(id);
  }
};

inline double satisfaction(const QoCSVector& qocs, const Capacities& caps, bool prefers_raw,
                           double popularity, double reputation, const EconParams& p) {
  const int u = prefers_raw ? 0 : 1;
  return p.satisfaction_coeff * popularity * reputation * std::log(1.0 + caps[u] * qocs[u]);
}

inline double subscriber_utility(const QoCSVector& qocs, const PriceVector& price,
                                 bool prefers_raw, const DelayVector& delay,
                                 const Capacities& caps, double popularity, double reputation,
                                 const EconParams& p) {
  const int u = prefers_raw ? 0 : 1;
  return satisfaction(qocs, caps, prefers_raw, popularity, reputation, p) -
         p.price_adjust[u] * price[u] * qocs[u] - p.delay_adjust[u] * delay[u];
}

// Utility of one part for all J^u members of that part.
inline double group_part_utility(int part, int members, double qocs, double price,
                                 double delay_s, double capacity, double popularity,
                                 double reputation, const EconParams& p) {
  if (members == 0) return 0.0;
  return members * (p.satisfaction_coeff * popularity * reputation *
                        std::log(1.0 + capacity * qocs) -
                    p.price_adjust[part] * price * qocs - p.delay_adjust[part] * delay_s);
}

inline double group_utility(const GroupSize& group, const QoCSVector& qocs,
                            const PriceVector& price, const DelayVector& delay,
                            const Capacities& caps, double popularity, double reputation,
                            const EconParams& p) {
  if (group.total() == 0) throw std::invalid_argument("subscriber group is empty");
  double total = 0.0;
  for (int u = 0; u < 2; ++u) {
    total += group_part_utility(u, group[u], qocs[u], price[u], delay[u], caps[u], popularity,
                                reputation, p);
  }
  return total;
}

// Total paid by the group: sum over members of theta^u p^u q^u.
inline double group_payment(const GroupSize& group, const QoCSVector& qocs,
                            const PriceVector& price, const EconParams& p) {
  double total = 0.0;
  for (int u = 0; u < 2; ++u) total += group[u] * p.price_adjust[u] * price[u] * qocs[u];
  return total;
}

inline double publisher_part_cost(int part, double qocs, double capacity,
                                  const EconParams& p) {
  return p.cost_adjust[part] * p.cost_param(part) * capacity * qocs * qocs;
}

inline double publisher_cost(const QoCSVector& qocs, const Capacities& caps,
                             const EconParams& p, bool has_raw_subs, bool has_result_subs) {
  double cost = 0.0;
  if (has_raw_subs) cost += publisher_part_cost(0, qocs.raw, caps.sensing, p);
  if (has_result_subs) cost += publisher_part_cost(1, qocs.result, caps.processing, p);
  return cost;
}

// One content's contribution to its publisher's utility.
struct PublisherContentTerm {
  GroupSize group;
  QoCSVector qocs;
  PriceVector price;
  Capacities caps;
  EnergyCost energy;
};

inline double publisher_revenue(const PublisherContentTerm& t, const EconParams& p) {
  return group_payment(t.group, t.qocs, t.price, p);
}

inline double publisher_content_utility(const PublisherContentTerm& t, const EconParams& p) {
  const bool has_raw = t.group.raw > 0;
  const bool has_result = t.group.result > 0;
  double u = publisher_revenue(t, p) - publisher_cost(t.qocs, t.caps, p, has_raw, has_result);
  if (has_raw) u -= t.energy.raw;
  if (has_result) u -= t.energy.result;
  return u - p.listing_fee;
}

inline double publisher_utility(std::span<const PublisherContentTerm> terms,
                                const EconParams& p) {
  double total = 0.0;
  for (const auto& t : terms) total += publisher_content_utility(t, p);
  return total;
}

}  // namespace spad
