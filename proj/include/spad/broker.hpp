#pragma once

// Broker state kept by a fleet's master vehicle: topic registry, a retention
// window of published metadata, and per-content subscriber groups.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <stdexcept>
#include <vector>

#include "spad/content.hpp"
#include "spad/economics.hpp"

namespace spad {

struct Subscription {
  VehicleId subscriber_id;
  ContentId content_id;
  bool prefers_raw = true;

  friend auto operator<=>(const Subscription& a, const Subscription& b) {
    return std::tie(a.subscriber_id, a.content_id) <=> std::tie(b.subscriber_id, b.content_id);
  }
  friend bool operator==(const Subscription& a, const Subscription& b) {
    return a.subscriber_id == b.subscriber_id && a.content_id == b.content_id;
  }
};

struct TopicRecord {
  TopicId id;
  std::uint64_t retention_window_slots = 1;
  std::set<VehicleId> publishers;
  std::set<VehicleId> subscribers;
};

struct RetainedMetadata {
  ContentId content_id;
  TopicId topic_id;
  Metadata meta;
  std::uint64_t slot = 0;
  std::uint64_t bytes = 0;
};

class BrokerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Broker {
 public:
  explicit Broker(std::uint64_t buffer_bytes, std::uint64_t default_retention_slots = 1)
      : buffer_bytes_(buffer_bytes), default_retention_(default_retention_slots) {
    if (default_retention_slots == 0) throw BrokerError("retention window must be positive");
  }

  void add_topic(TopicId id, std::optional<std::uint64_t> retention_slots = std::nullopt) {
    const auto w = retention_slots.value_or(default_retention_);
    if (w == 0) throw BrokerError("retention window must be positive");
    if (!topics_.emplace(id, TopicRecord{id, w, {}, {}}).second)
      throw BrokerError("topic already exists");
  }

  void register_publisher(TopicId topic, VehicleId publisher) {
    topic_ref(topic).publishers.insert(publisher);
  }

  void follow_topic(TopicId topic, VehicleId subscriber) {
    topic_ref(topic).subscribers.insert(subscriber);
  }

  // Retains the record and returns the topic followers to notify.
  std::vector<VehicleId> publish(ContentId content, TopicId topic, const Metadata& meta,
                                 std::uint64_t slot) {
    auto& t = topic_ref(topic);
    if (!t.publishers.contains(meta.publisher_identity))
      throw BrokerError("publisher not registered at topic");
    if (slot < now_) throw BrokerError("publish before current slot");
    if (groups_.contains(content)) throw BrokerError("content already published");
    const auto bytes = static_cast<std::uint64_t>(serialized_metadata_size(meta));
    if (bytes > buffer_bytes_) throw BrokerError("metadata record exceeds broker buffer");

    advance(slot);
    window_.push_back(RetainedMetadata{content, topic, meta, slot, bytes});
    retained_bytes_ += bytes;
    SubscriberGroup group;
    group.content_id = content;
    groups_.emplace(content, std::move(group));
    while (retained_bytes_ > buffer_bytes_) evict_oldest();

    return {t.subscribers.begin(), t.subscribers.end()};
  }

  // Moves the clock forward and drops records older than their topic window.
  void advance(std::uint64_t now) {
    if (now < now_) throw BrokerError("broker clock cannot move backwards");
    if (now == now_ && swept_) return;
    now_ = now;
    swept_ = true;
    std::erase_if(window_, [&](const RetainedMetadata& r) {
      if (now_ - r.slot <= topics_.at(r.topic_id).retention_window_slots) return false;
      drop_content(r);
      return true;
    });
  }

  // Accepted iff the publisher's reputation meets the threshold.
  bool subscribe(const Subscription& sub, double publisher_reputation, double threshold) {
    auto it = groups_.find(sub.content_id);
    if (it == groups_.end()) throw BrokerError("unknown content");
    if (it->second.contains(sub.subscriber_id)) throw BrokerError("duplicate subscription");
    if (publisher_reputation < threshold) return false;
    it->second.reputation_threshold = threshold;
    it->second.add(sub.subscriber_id, sub.prefers_raw);
    return true;
  }

  bool has_content(ContentId c) const { return groups_.contains(c); }
  const SubscriberGroup& group(ContentId c) const {
    auto it = groups_.find(c);
    if (it == groups_.end()) throw BrokerError("unknown content");
    return it->second;
  }
  const std::deque<RetainedMetadata>& window() const { return window_; }
  // Accepted subscriptions across all retained content, in (subscriber, content) order.
  std::vector<Subscription> subscriptions() const {
    std::vector<Subscription> out;
    for (const auto& [cid, g] : groups_) {
      for (auto id : g.raw_subscribers) out.push_back({id, cid, true});
      for (auto id : g.result_subscribers) out.push_back({id, cid, false});
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  const TopicRecord& topic(TopicId id) const {
    auto it = topics_.find(id);
    if (it == topics_.end()) throw BrokerError("unknown topic");
    return it->second;
  }
  std::uint64_t retained_bytes() const { return retained_bytes_; }
  std::uint64_t buffer_bytes() const { return buffer_bytes_; }
  std::uint64_t now() const { return now_; }
  std::uint32_t next_multicast_address() { return next_multicast_++; }

 private:
  TopicRecord& topic_ref(TopicId id) {
    auto it = topics_.find(id);
    if (it == topics_.end()) throw BrokerError("unknown topic");
    return it->second;
  }

  void drop_content(const RetainedMetadata& r) {
    retained_bytes_ -= r.bytes;
    auto git = groups_.find(r.content_id);
    if (git == groups_.end()) return;
    groups_.erase(git);
  }

  void evict_oldest() {
    drop_content(window_.front());
    window_.pop_front();
  }

  std::uint64_t buffer_bytes_;
  std::uint64_t default_retention_;
  std::uint64_t now_ = 0;
  std::uint64_t retained_bytes_ = 0;
  std::uint32_t next_multicast_ = 1;
  std::map<TopicId, TopicRecord> topics_;
  std::deque<RetainedMetadata> window_;
  std::map<ContentId, SubscriberGroup> groups_;
  bool swept_ = false;
};

}  // namespace spad
