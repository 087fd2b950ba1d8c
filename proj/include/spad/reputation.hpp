#pragma once

// Hybrid trust: a role term plus a beta-expectation behaviour term with time
// decay and a punishment factor on misbehaviour. Timestamps are slot indices;
// time_per_slot converts slot differences into the unit the decay rates and the
// misbehaviour-free duration are expressed in.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "spad/core.hpp"

namespace spad {

struct TrustParams {
  double role_weight = 0.05;
  double behavior_weight = 0.5;
  double decay_pos = 0.001;
  double decay_neg = 0.001;
  double w_report = 1.0;
  double w_recent = 1.0;
  double w_mis = 1.0;
  double punishment = 1.2;
  bool decay_enabled = true;
  double time_per_slot = 1.0;
  std::vector<double> role_trust;  // v_a, indexed by role

  // Standard beta-mean trust: no roles, no decay, no punishment, no recency.
  static TrustParams bit(std::vector<double> roles = {}) {
    TrustParams p;
    p.role_weight = 0.0;
    p.behavior_weight = 1.0;
    p.w_recent = 0.0;
    p.punishment = 1.0;
    p.decay_enabled = false;
    p.role_trust = std::move(roles);
    return p;
  }
};

inline void validate(const TrustParams& p) {
  if (p.role_weight < 0 || p.behavior_weight < 0)
    throw std::invalid_argument("trust weights must be >= 0");
  if (!(p.decay_pos > 0) || !(p.decay_neg > 0))
    throw std::invalid_argument("decay rates must be positive");
  if (p.w_report < 0 || p.w_recent < 0 || p.w_mis < 0)
    throw std::invalid_argument("behaviour weights must be >= 0");
  if (p.punishment < 1.0) throw std::invalid_argument("punishment must be >= 1");
  if (!(p.time_per_slot > 0)) throw std::invalid_argument("time_per_slot must be positive");
}

// Running value of sum_b exp(-rate * (now - t_b)), updated in O(1) per event.
class DecayedCounter {
 public:
  void add(std::uint64_t slot, double rate, double time_per_slot, bool decay) {
    value_ = value_at(slot, rate, time_per_slot, decay) + 1.0;
    anchor_ = slot;
  }

  double value_at(std::uint64_t now, double rate, double time_per_slot, bool decay) const {
    if (!decay || value_ == 0.0) return value_;
    if (now < anchor_) throw std::invalid_argument("query before last recorded event");
    return value_ * std::exp(-rate * static_cast<double>(now - anchor_) * time_per_slot);
  }

 private:
  double value_ = 0.0;
  std::uint64_t anchor_ = 0;
};

struct BehaviorRecord {
  std::vector<std::uint64_t> report_slots;
  std::vector<std::uint64_t> misbehavior_slots;
  DecayedCounter reports;
  DecayedCounter misbehaviors;

  std::optional<std::uint64_t> last_misbehavior() const {
    if (misbehavior_slots.empty()) return std::nullopt;
    return misbehavior_slots.back();
  }
};

inline double role_effect(std::size_t role_index, const TrustParams& p) {
  if (role_index >= p.role_trust.size()) throw std::out_of_range("invalid role index");
  return p.role_trust[role_index];
}

inline double recent_duration(const BehaviorRecord& r, std::uint64_t now, const TrustParams& p) {
  const std::uint64_t since = r.last_misbehavior().value_or(0);
  if (now < since) throw std::invalid_argument("query before last recorded event");
  return static_cast<double>(now - since) * p.time_per_slot;
}

inline double positive_effect(const BehaviorRecord& r, std::uint64_t now, const TrustParams& p) {
  return p.w_report * r.reports.value_at(now, p.decay_pos, p.time_per_slot, p.decay_enabled) +
         p.w_recent * recent_duration(r, now, p);
}

inline double negative_effect(const BehaviorRecord& r, std::uint64_t now, const TrustParams& p) {
  return p.w_mis * r.misbehaviors.value_at(now, p.decay_neg, p.time_per_slot, p.decay_enabled);
}

inline double behavior_effect(double pos, double neg, double punishment) {
  if (pos < 0 || neg < 0) throw std::invalid_argument("behaviour effects must be >= 0");
  const double a = pos + 1.0;
  const double b = neg + 1.0;
  return a / (a + punishment * b);
}

inline double combine_reputation(double role, double behavior, const TrustParams& p) {
  return std::clamp(p.role_weight * role + p.behavior_weight * behavior, 0.0, 1.0);
}

class ReputationLedger {
 public:
  explicit ReputationLedger(TrustParams params) : params_(std::move(params)) { validate(params_); }

  const TrustParams& params() const { return params_; }

  void add_vehicle(VehicleId id, std::size_t role_index) {
    role_effect(role_index, params_);
    if (!roles_.emplace(id, role_index).second)
      throw std::invalid_argument("vehicle already registered");
    records_.emplace(id, BehaviorRecord{});
  }

  bool contains(VehicleId id) const { return records_.contains(id); }

  const BehaviorRecord& record(VehicleId id) const { return records_.at(id); }

  double reputation(VehicleId id, std::uint64_t now) const {
    const auto& r = records_.at(id);
    const double behavior =
        behavior_effect(positive_effect(r, now, params_), negative_effect(r, now, params_),
                        params_.punishment);
    return combine_reputation(role_effect(roles_.at(id), params_), behavior, params_);
  }

  // Applies a forensics verdict on a report. Returns true when any record changed.
  // A given (content, slot) event is charged to the accused once, and each
  // reporter is credited at most once for it.
  bool record_report(VehicleId reporter, VehicleId accused, ContentId content,
                     std::uint64_t slot, bool verdict) {
    if (reporter == accused) throw std::invalid_argument("vehicle cannot report itself");
    auto& accused_rec = records_.at(accused);
    auto& reporter_rec = records_.at(reporter);
    if (!verdict) return false;
    if (slot < latest_slot_) throw std::invalid_argument("reports must arrive in slot order");
    if (slot > latest_slot_) {
      charged_.clear();
      credited_.clear();
      latest_slot_ = slot;
    }
    bool changed = false;
    if (charged_.insert(content).second) {
      accused_rec.misbehavior_slots.push_back(slot);
      accused_rec.misbehaviors.add(slot, params_.decay_neg, params_.time_per_slot,
                                   params_.decay_enabled);
      changed = true;
    }
    if (credited_.emplace(content, reporter).second) {
      reporter_rec.report_slots.push_back(slot);
      reporter_rec.reports.add(slot, params_.decay_pos, params_.time_per_slot,
                               params_.decay_enabled);
      changed = true;
    }
    return changed;
  }

  std::vector<VehicleId> vehicles() const {
    std::vector<VehicleId> ids;
    ids.reserve(records_.size());
    for (const auto& [id, rec] : records_) ids.push_back(id);
    return ids;
  }

  static void write_csv_header(std::ostream& os) {
    os << "vehicle_id,slot,reputation,n_report,n_mis\n";
  }

  void write_csv_rows(std::ostream& os, std::uint64_t now) const {
    for (const auto& [id, rec] : records_) {
      os << id.value << ',' << now << ',' << reputation(id, now) << ','
         << rec.report_slots.size() << ',' << rec.misbehavior_slots.size() << '\n';
    }
  }

 private:
  TrustParams params_;
  std::map<VehicleId, std::size_t> roles_;
  std::map<VehicleId, BehaviorRecord> records_;
  std::uint64_t latest_slot_ = 0;
  std::set<ContentId> charged_;
  std::set<std::pair<ContentId, VehicleId>> credited_;
};

}  // namespace spad
