#pragma once

// Two-part contents, Zipf popularity, quality vectors and the metadata record
// the fleet broker publishes for every content.

#include <openssl/evp.h>
#include <openssl/core_names.h>
#include <openssl/params.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spad/core.hpp"

namespace spad {

inline constexpr std::uint64_t kBytesPerKB = 1000;
inline constexpr std::uint64_t kBytesPerMB = 1000 * 1000;

struct Content {
  ContentId id;
  TopicId topic_id;
  VehicleId publisher_id;
  SensorType sensor_type;
  std::uint64_t raw_size_bytes = 1;
  std::uint64_t result_size_bytes = 1;
  std::uint32_t popularity_rank = 1;
  bool ground_truth_honest = true;
};

struct PopularityParams {
  double zipf_exponent = 0.9;
  std::uint32_t catalog_size = 1;
};

inline double zipf_normalizer(const PopularityParams& params) {
  double sum = 0.0;
  for (std::uint32_t l = 1; l <= params.catalog_size; ++l) {
    sum += std::pow(static_cast<double>(l), -params.zipf_exponent);
  }
  return sum;
}

// Same as below, with the catalog normalizer supplied by the caller.
inline double zipf_popularity(std::uint32_t rank, const PopularityParams& params,
                              double normalizer) {
  if (params.zipf_exponent < 0.0) throw std::domain_error("Zipf exponent must be >= 0");
  if (params.catalog_size < 1) throw std::domain_error("catalog must be non-empty");
  if (rank < 1 || rank > params.catalog_size) {
    throw std::domain_error("popularity rank outside [1, catalog_size]");
  }
  return std::pow(static_cast<double>(rank), -params.zipf_exponent) / normalizer;
}

inline double zipf_popularity(std::uint32_t rank, const PopularityParams& params) {
  return zipf_popularity(rank, params, zipf_normalizer(params));
}

// Fraction of sensing / processing resource the publisher commits per part.
struct QoCSVector {
  double raw = 0.0;
  double result = 0.0;

  double operator[](int part) const { return part == 0 ? raw : result; }
  double& operator[](int part) { return part == 0 ? raw : result; }
  friend bool operator==(const QoCSVector&, const QoCSVector&) = default;
};

struct QualityVector {
  double raw = 0.0;
  double result = 0.0;
};

// Sensing capacity on the content's sensor and processing capacity.
struct Capacities {
  double sensing = 0.0;
  double processing = 0.0;

  double operator[](int part) const { return part == 0 ? sensing : processing; }
};

inline Capacities capacities_of(const Cav& publisher, SensorType sensor) {
  return {publisher.sensing(sensor), publisher.processing_capacity};
}

inline QualityVector content_quality(const QoCSVector& qocs, const Cav& publisher,
                                     SensorType sensor) {
  return {qocs.raw * publisher.sensing(sensor),
          qocs.result * publisher.processing_capacity};
}

// --- digests and signatures ------------------------------------------------

using Digest = std::array<std::uint8_t, 32>;

namespace detail {

// Algorithms are fetched once; implicit fetching on every call dominates the
// cost of hashing small records.
inline const EVP_MD* sha256_md() {
  static const std::unique_ptr<EVP_MD, decltype(&EVP_MD_free)> md(
      EVP_MD_fetch(nullptr, "SHA256", nullptr), &EVP_MD_free);
  if (!md) throw std::runtime_error("SHA-256 unavailable");
  return md.get();
}

inline EVP_MAC* hmac_algorithm() {
  static const std::unique_ptr<EVP_MAC, decltype(&EVP_MAC_free)> mac(
      EVP_MAC_fetch(nullptr, "HMAC", nullptr), &EVP_MAC_free);
  if (!mac) throw std::runtime_error("HMAC unavailable");
  return mac.get();
}

}  // namespace detail

inline Digest sha256(std::span<const std::uint8_t> bytes) {
  thread_local const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  Digest out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex2(ctx.get(), detail::sha256_md(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return out;
}

// Pluggable signature scheme over a metadata digest.
class Signer {
 public:
  virtual ~Signer() = default;
  virtual std::vector<std::uint8_t> sign(VehicleId signer, const Digest& message) const = 0;
  virtual bool verify(VehicleId signer, const Digest& message,
                      std::span<const std::uint8_t> signature) const = 0;
};

// Deterministic stand-in for a real PKI: an HMAC-SHA256 stamp keyed by a
// secret derived from the vehicle identity. Keyed contexts are cached per
// vehicle, so one instance must not be shared between threads.
class MockSigner final : public Signer {
 public:
  std::vector<std::uint8_t> sign(VehicleId signer, const Digest& message) const override {
    std::unique_ptr<EVP_MAC_CTX, CtxFree> ctx(EVP_MAC_CTX_dup(keyed(signer)));
    std::vector<std::uint8_t> out(EVP_MAX_MD_SIZE);
    std::size_t len = 0;
    if (!ctx || EVP_MAC_update(ctx.get(), message.data(), message.size()) != 1 ||
        EVP_MAC_final(ctx.get(), out.data(), &len, out.size()) != 1) {
      throw std::runtime_error("HMAC failed");
    }
    out.resize(len);
    return out;
  }

  bool verify(VehicleId signer, const Digest& message,
              std::span<const std::uint8_t> signature) const override {
    const auto expected = sign(signer, message);
    return expected.size() == signature.size() &&
           std::equal(expected.begin(), expected.end(), signature.begin());
  }

 private:
  struct CtxFree {
    void operator()(EVP_MAC_CTX* c) const { EVP_MAC_CTX_free(c); }
  };

  static Digest key_for(VehicleId id) {
    std::vector<std::uint8_t> seed = {'s', 'p', 'a', 'd', '-', 'k', 'e', 'y'};
    for (int i = 0; i < 4; ++i) seed.push_back(static_cast<std::uint8_t>(id.value >> (8 * i)));
    return sha256(seed);
  }

  const EVP_MAC_CTX* keyed(VehicleId id) const {
    auto it = keyed_.find(id.value);
    if (it != keyed_.end()) return it->second.get();
    std::unique_ptr<EVP_MAC_CTX, CtxFree> ctx(EVP_MAC_CTX_new(detail::hmac_algorithm()));
    const auto key = key_for(id);
    char digest_name[] = "SHA256";
    const OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string("digest", digest_name, 0), OSSL_PARAM_construct_end()};
    if (!ctx || EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1)
      throw std::runtime_error("HMAC key setup failed");
    return keyed_.emplace(id.value, std::move(ctx)).first->second.get();
  }

  mutable std::map<std::uint32_t, std::unique_ptr<EVP_MAC_CTX, CtxFree>> keyed_;
};

// --- metadata ----------------------------------------------------------------

struct Metadata {
  VehicleId publisher_identity;
  TimeSlot publish_time;
  SensorType sensor_type;
  std::uint32_t multicast_address = 0;
  Digest raw_hash{};
  Digest result_hash{};
  Digest meta_hash{};
  std::vector<std::uint8_t> signature;
};

namespace detail {

class ByteWriter {
 public:
  ByteWriter() { buf_.reserve(256); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  // Each field is written as a little-endian u32 length followed by its bytes.
  void field(std::span<const std::uint8_t> bytes) {
    u32(static_cast<std::uint32_t>(bytes.size()));
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  template <typename Fn>
  void field_with(Fn&& fill) {
    ByteWriter inner;
    fill(inner);
    field(inner.bytes());
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

inline std::string hex(std::span<const std::uint8_t> bytes) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (auto b : bytes) os << std::setw(2) << static_cast<int>(b);
  return os.str();
}

}  // namespace detail

// Length-prefixed layout, fields in declaration order:
//   publisher_identity u32 | publish_time (u64 index, f64 slot length bits) |
//   sensor_type u32 | multicast_address u32 | raw_hash[32] | result_hash[32] |
//   meta_hash[32] | signature[n]
// With include_trailer = false the last two fields are omitted; that prefix is
// what meta_hash covers.
inline std::vector<std::uint8_t> serialize_metadata(const Metadata& m,
                                                    bool include_trailer = true) {
  detail::ByteWriter w;
  w.field_with([&](auto& f) { f.u32(m.publisher_identity.value); });
  w.field_with([&](auto& f) {
    f.u64(m.publish_time.index);
    std::uint64_t bits;
    std::memcpy(&bits, &m.publish_time.slot_length_s, sizeof bits);
    f.u64(bits);
  });
  w.field_with([&](auto& f) { f.u32(m.sensor_type.value); });
  w.field_with([&](auto& f) { f.u32(m.multicast_address); });
  w.field(m.raw_hash);
  w.field(m.result_hash);
  if (include_trailer) {
    w.field(m.meta_hash);
    w.field(m.signature);
  }
  return w.bytes();
}

// Length of serialize_metadata(m) without building it.
inline std::size_t serialized_metadata_size(const Metadata& m) {
  constexpr std::size_t prefix = 4;
  return (prefix + 4) + (prefix + 16) + (prefix + 4) + (prefix + 4) + 3 * (prefix + 32) +
         (prefix + m.signature.size());
}

inline std::string dump_metadata(const Metadata& m) {
  std::ostringstream os;
  os << "publisher_identity=" << m.publisher_identity.value << '\n'
     << "publish_time=" << m.publish_time.index << " (slot " << m.publish_time.slot_length_s
     << " s)\n"
     << "sensor_type=" << m.sensor_type.value << '\n'
     << "multicast_address=" << m.multicast_address << '\n'
     << "raw_hash=" << detail::hex(m.raw_hash) << '\n'
     << "result_hash=" << detail::hex(m.result_hash) << '\n'
     << "meta_hash=" << detail::hex(m.meta_hash) << '\n'
     << "signature=" << detail::hex(m.signature) << '\n';
  return os.str();
}

// Payloads are synthetic; the stand-in for a part's bytes is a small descriptor
// of the content id, part, size and truthfulness.
inline std::vector<std::uint8_t> payload_stand_in(const Content& c, int part) {
  detail::ByteWriter w;
  w.u32(c.id.value);
  w.u32(static_cast<std::uint32_t>(part));
  w.u64(part == 0 ? c.raw_size_bytes : c.result_size_bytes);
  w.u32(c.publisher_id.value);
  w.u32(c.ground_truth_honest ? 1u : 0u);
  return w.bytes();
}

inline Digest compute_meta_hash(const Metadata& m) {
  return sha256(serialize_metadata(m, false));
}

inline Metadata build_metadata(const Content& content, const Cav& publisher, TimeSlot slot,
                               std::uint32_t multicast_address, const Signer& signer) {
  Metadata m;
  m.publisher_identity = publisher.id;
  m.publish_time = slot;
  m.sensor_type = content.sensor_type;
  m.multicast_address = multicast_address;
  m.raw_hash = sha256(payload_stand_in(content, 0));
  m.result_hash = sha256(payload_stand_in(content, 1));
  m.meta_hash = compute_meta_hash(m);
  m.signature = signer.sign(publisher.id, m.meta_hash);
  return m;
}

inline Metadata build_metadata(const Content& content, const Cav& publisher, TimeSlot slot,
                               std::uint32_t multicast_address) {
  return build_metadata(content, publisher, slot, multicast_address, MockSigner{});
}

// True iff meta_hash matches the record and the signature covers meta_hash.
inline bool verify_metadata(const Metadata& m, const Signer& signer) {
  if (compute_meta_hash(m) != m.meta_hash) return false;
  return signer.verify(m.publisher_identity, m.meta_hash, m.signature);
}

}  // namespace spad
