#pragma once

// In-process multicast harness: one encode, many users each holding a
// distinct pool key, plus leak, collusion and brute-force experiments.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcac/codec.hpp"
#include "bcac/keying.hpp"

namespace bcac {

struct SimConfig {
  std::size_t users = 8;
  std::size_t n = 1000;
  std::size_t m = 128;
  Probability p{58982};  // ~0.9
  Seed seed{};
  ModeSet modes{};
  std::size_t collude_k = 0;
  int precision = kDefaultPrecision;  // 0 selects the exact coder
  std::string scheme = "SEALBOX";
  std::size_t non_pool_probes = 3;
  std::size_t trials = 100;

  /// Explicit plaintext / original key instead of seeded generation.
  std::optional<Bits> message;
  std::optional<EncryptionKey> key;
};

struct UserOutcome {
  std::string user;
  std::string key;  // digit string; empty when M = 0
  bool decoded_ok = false;
  std::size_t wrapped_bytes = 0;
};

struct ProbeOutcome {
  std::string key;
  std::size_t mismatches = 0;
  std::optional<std::size_t> first_mismatch;
  bool decode_error = false;
};

struct BruteForceResult {
  std::vector<EncryptionKey> valid;
  std::size_t keyspace = 0;
  bool contains_pool = false;
};

struct SimReport {
  std::size_t users = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint16_t p_num = 0;
  std::string coder;
  std::string scheme;
  std::string original_key;

  std::uint64_t payload_bits = 0;
  std::size_t ciphertext_bytes = 0;
  double rate = 0;     // payload bits per message bit
  double entropy = 0;  // H(p)
  LengthBound bound{};

  std::string ciphertext_sha256;
  bool single_ciphertext = false;  // every user hashed identical bytes

  std::vector<UserOutcome> per_user;
  std::size_t successes = 0;

  std::size_t key_payload_bits_per_user = 0;  // 3M
  std::size_t wrap_overhead_bytes = 0;        // framing + scheme overhead + blob header
  std::size_t total_key_bits = 0;             // users * 3M
  bool raw_key_on_wire = false;

  PoolMath pool{};
  std::vector<ProbeOutcome> non_pool_probes;
  std::optional<BruteForceResult> brute_force;
};

SimReport simulate_multicast(const SimConfig& cfg);

/// Every key in 8^M whose decode of `cw` reproduces `plaintext`.
/// `precision` 0 decodes with the exact coder. M must be at most 4.
BruteForceResult brute_force_valid_keys(const Codeword& cw, const Bits& plaintext,
                                        const KeyPoolSpec& pool, int precision = 0);

/// Positionwise mix: each digit taken from a colluder chosen by the seed.
EncryptionKey collude(const std::vector<EncryptionKey>& keys, const Seed& seed);

struct TraceSummary {
  std::size_t users = 0;
  std::size_t m = 0;
  std::size_t collude_k = 0;
  std::size_t trials = 0;

  std::size_t leak_attributed_correctly = 0;

  std::size_t mix_trials = 0;
  std::size_t mix_attributed_to_colluder = 0;
  std::size_t mix_attributed_to_innocent = 0;  // mix coincides with an innocent's issued key
  std::size_t mix_misattributed = 0;           // attributed to a user whose key differs
  std::size_t mix_collusion_suspected = 0;
  std::size_t mix_unknown = 0;

  std::size_t non_pool_trials = 0;
  std::size_t non_pool_unknown = 0;

  bool wrapping_enabled = false;
  bool raw_key_on_wire = false;
};

TraceSummary run_trace_experiment(const SimConfig& cfg);

nlohmann::ordered_json to_json(const SimReport& r);
nlohmann::ordered_json to_json(const TraceSummary& s);
nlohmann::ordered_json to_json(const PoolMath& pm);

}  // namespace bcac
