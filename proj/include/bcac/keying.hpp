#pragma once

// Key generation, the multicast pool of equivalent keys, per-user issuance
// and leak tracing.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcac/bits.hpp"
#include "bcac/key.hpp"
#include "bcac/maps.hpp"

namespace bcac {

/// 256 bits of caller-supplied entropy.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  /// 64 hex digits, or a decimal integer (stored little-endian in the first 8 bytes).
  static Seed parse(std::string_view text);
  static Seed from_u64(std::uint64_t v);
  std::string to_hex() const;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Deterministic pseudorandom bits expanded from a seed under a label.
/// ChaCha20 keystream keyed by BLAKE2b(seed, label).
class SeedStream {
 public:
  SeedStream(const Seed& seed, std::string_view label);

  std::uint32_t bits(int count);  // count <= 32
  /// Uniform in [0, bound) by rejection on ceil(log2 bound) bits.
  std::uint32_t below(std::uint32_t bound);

 private:
  void refill();

  std::array<std::uint8_t, 32> subkey_{};
  std::uint64_t block_ = 0;
  std::vector<std::uint8_t> buffer_;
  std::size_t byte_pos_ = 0;
  int bit_pos_ = 0;
};

/// The modes keygen may draw from.
class ModeSet {
 public:
  ModeSet();  // all eight
  explicit ModeSet(std::vector<MapMode> allowed);

  const std::vector<MapMode>& modes() const noexcept { return allowed_; }
  std::size_t size() const noexcept { return allowed_.size(); }
  bool contains(MapMode m) const;
  bool is_full() const noexcept { return allowed_.size() == MapMode::kCount; }

  /// Parse "1,5" or "15".
  static ModeSet parse(std::string_view text);

 private:
  std::vector<MapMode> allowed_;
};

/// Constrain key generation to a subset; {1,5} reproduces randomized
/// interval-order coding (positive slopes, swapped interval order).
ModeSet restrict_modes(std::span<const int> digits);

EncryptionKey keygen(const Seed& seed, std::size_t m, const ModeSet& modes = {},
                     MapMode tail = MapMode(1));

/// Per position, the original mode and its twin for the plaintext bit there.
class KeyPoolSpec {
 public:
  KeyPoolSpec() = default;
  KeyPoolSpec(std::vector<std::pair<MapMode, MapMode>> pairs, MapMode tail)
      : pairs_(std::move(pairs)), tail_(tail) {}

  std::size_t size() const noexcept { return pairs_.size(); }
  const std::vector<std::pair<MapMode, MapMode>>& pairs() const noexcept { return pairs_; }
  MapMode tail() const noexcept { return tail_; }

  /// 2^M
  BigInt pool_size() const;

  /// Pool member selected by a flip pattern (1 = twin at that position).
  EncryptionKey member(std::span<const std::uint8_t> flips) const;
  /// The original key (all-zero flip pattern).
  EncryptionKey original() const;

  /// All members, sorted by digit string. Only for M <= 16.
  std::vector<EncryptionKey> enumerate() const;

  friend bool operator==(const KeyPoolSpec&, const KeyPoolSpec&) = default;

 private:
  std::vector<std::pair<MapMode, MapMode>> pairs_;
  MapMode tail_{};
};

constexpr std::size_t kMaxEnumerableM = 16;

KeyPoolSpec derive_pool(const EncryptionKey& key, std::span<const std::uint8_t> plaintext_prefix);

bool is_pool_member(const KeyPoolSpec& pool, const EncryptionKey& key);

struct PoolMath {
  BigInt valid;        // 2^M
  BigInt total;        // |modes|^M
  Rational guess_prob; // valid / total
};

/// Pool and keyspace sizes for an M-position key over `alphabet` allowed modes.
PoolMath pool_math(std::size_t m, std::size_t alphabet = MapMode::kCount);

struct LedgerEntry {
  std::string session;
  std::string user;
  EncryptionKey key;
  std::string issued_at;  // ISO-8601 UTC
};

/// Issued keys for one session. Mutations assume a single writer.
class KeyLedger {
 public:
  KeyLedger(std::string session, KeyPoolSpec pool);

  const std::string& session() const noexcept { return session_; }
  const KeyPoolSpec& pool() const noexcept { return pool_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }

  /// Record an issuance. The key must be pool-valid and unissued, the user new.
  void record(const std::string& user, const EncryptionKey& key, std::string issued_at);

  std::optional<std::string> user_of(const EncryptionKey& key) const;
  std::optional<EncryptionKey> key_of(const std::string& user) const;
  bool issued(const EncryptionKey& key) const { return by_key_.contains(key.digits()); }

  /// One JSON object per line: {"session","user","key","issued_at"}.
  std::string to_jsonl() const;
  /// Append the given entries (default: all) to `path`.
  void append_jsonl(const std::filesystem::path& path, std::size_t from_entry = 0) const;
  /// Load the entries of `session` from a JSON-lines file, validating each key
  /// against `pool`.
  static KeyLedger load_jsonl(const std::filesystem::path& path, const std::string& session,
                              KeyPoolSpec pool);

 private:
  std::string session_;
  KeyPoolSpec pool_;
  std::vector<LedgerEntry> entries_;
  std::map<std::string, std::size_t> by_key_;
  std::map<std::string, std::size_t> by_user_;
};

std::string utc_timestamp();

/// Issue an unissued pool member to `user`. The start point comes from the
/// seed and user id; collisions advance the flip pattern by one (mod 2^M).
/// A user who already holds a key gets it back unchanged.
EncryptionKey sample_user_key(const KeyPoolSpec& pool, const std::string& user, KeyLedger& ledger,
                              const Seed& seed);

enum class TraceVerdict { Attributed, CollusionSuspected, Unknown };

struct TraceResult {
  TraceVerdict verdict;
  std::optional<std::string> user;
};

std::string_view to_string(TraceVerdict v);

TraceResult trace_key(const EncryptionKey& leaked, const KeyLedger& ledger);

}  // namespace bcac
