#include "bcac/multicast.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <sodium.h>

#include "bcac/error.hpp"
#include "sodium_init.hpp"
#include "bcac/wrap.hpp"

namespace bcac {

namespace {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_hash_sha256_BYTES> digest{};
  crypto_hash_sha256(digest.data(), bytes.data(), bytes.size());
  std::string out(digest.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), digest.data(), digest.size());
  out.pop_back();
  return out;
}

std::string user_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user-%04zu", i);
  return buf;
}

Bits bernoulli_message(const Seed& seed, std::size_t n, Probability p) {
  SeedStream stream(seed, "bcac/sim/message/v1");
  Bits out(n);
  for (auto& b : out) b = stream.bits(16) < p.num() ? 0 : 1;
  return out;
}

Bits decode_with(const Codeword& cw, const EncryptionKey& key, int precision) {
  return precision == 0 ? decode_exact(cw, key) : decode_stream(cw, key, precision);
}

bool contains_subsequence(std::span<const std::uint8_t> hay, std::span<const std::uint8_t> needle) {
  if (needle.empty()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

struct Session {
  Bits message;
  EncryptionKey key;
  KeyPoolSpec pool;
};

Session make_session(const SimConfig& cfg) {
  if (cfg.m > cfg.n) fail(ErrorKind::Config, "encrypted prefix M exceeds message length N");
  Session s;
  s.message = cfg.message ? *cfg.message : bernoulli_message(cfg.seed, cfg.n, cfg.p);
  if (s.message.size() != cfg.n) fail(ErrorKind::Config, "explicit message length differs from N");
  s.key = cfg.key ? *cfg.key : keygen(cfg.seed, cfg.m, cfg.modes);
  if (s.key.size() != cfg.m) fail(ErrorKind::Config, "explicit key length differs from M");
  s.pool = derive_pool(s.key, std::span(s.message).first(cfg.m));
  return s;
}

void check_capacity(const SimConfig& cfg) {
  if (BigInt(cfg.users) > pool_math(cfg.m).valid) {
    fail(ErrorKind::Capacity, std::to_string(cfg.users) + " users exceed the 2^" +
                                  std::to_string(cfg.m) + " keys in the pool");
  }
}

/// Uniform key over the allowed modes that is not in the pool.
std::optional<EncryptionKey> random_non_pool_key(SeedStream& stream, const KeyPoolSpec& pool) {
  if (pool.size() == 0) return std::nullopt;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<MapMode> modes;
    for (std::size_t i = 0; i < pool.size(); ++i) modes.emplace_back(1 + stream.below(8));
    EncryptionKey k(std::move(modes), pool.tail());
    if (!is_pool_member(pool, k)) return k;
  }
  return std::nullopt;
}

}  // namespace

SimReport simulate_multicast(const SimConfig& cfg) {
  check_capacity(cfg);
  const Session session = make_session(cfg);
  const WrappingScheme& scheme = scheme_by_name(cfg.scheme);

  const Codeword cw = cfg.precision == 0
                          ? encode_exact(session.message, cfg.p, session.key)
                          : encode_stream(session.message, cfg.p, session.key, cfg.precision);
  const std::vector<std::uint8_t> wire = cw.serialize();

  SimReport r;
  r.users = cfg.users;
  r.n = cfg.n;
  r.m = cfg.m;
  r.p_num = cfg.p.num();
  r.coder = cfg.precision == 0 ? "exact" : "stream/" + std::to_string(cfg.precision);
  r.scheme = std::string(scheme.name());
  r.original_key = session.key.digits();
  r.payload_bits = cw.header.payload_len_bits;
  r.ciphertext_bytes = wire.size();
  r.rate = cfg.n ? static_cast<double>(r.payload_bits) / static_cast<double>(cfg.n) : 0.0;
  r.entropy = binary_entropy(cfg.p);
  r.bound = code_length_bound(session.message, cfg.p);
  r.ciphertext_sha256 = sha256_hex(wire);
  r.pool = pool_math(cfg.m, cfg.modes.size());
  r.key_payload_bits_per_user = 3 * cfg.m;

  KeyLedger ledger("sim-" + cfg.seed.to_hex().substr(0, 16), session.pool);
  r.single_ciphertext = true;
  for (std::size_t i = 0; i < cfg.users; ++i) {
    UserOutcome u;
    u.user = user_name(i);
    const EncryptionKey issued = sample_user_key(session.pool, u.user, ledger, cfg.seed);
    u.key = issued.digits();

    // Sender side: wrap and put the blob on the wire next to the shared stream.
    const RecipientKeys recipient = scheme.make_recipient(u.user, cfg.seed);
    const std::vector<std::uint8_t> blob = wrap_key(issued, recipient.pub, scheme).to_blob();
    u.wrapped_bytes = blob.size();
    const auto needle = serialize_key_payload(issued);
    r.raw_key_on_wire = r.raw_key_on_wire || contains_subsequence(blob, needle);

    // Receiver side: everything below sees only wire bytes.
    const std::vector<std::uint8_t> received = wire;
    if (sha256_hex(received) != r.ciphertext_sha256) r.single_ciphertext = false;
    const EncryptionKey key = unwrap_key(WrappedKey::from_blob(blob, u.user), recipient, scheme);
    const Codeword rx = Codeword::parse(received);
    u.decoded_ok = decode_with(rx, key, cfg.precision) == session.message;
    if (u.decoded_ok) ++r.successes;
    r.per_user.push_back(std::move(u));
  }
  r.total_key_bits = cfg.users * r.key_payload_bits_per_user;
  r.wrap_overhead_bytes = kKeyFramingBytes + scheme.overhead_bytes() + 5;

  SeedStream probe_stream(cfg.seed, "bcac/sim/probe/v1");
  for (std::size_t i = 0; i < cfg.non_pool_probes; ++i) {
    auto probe = random_non_pool_key(probe_stream, session.pool);
    if (!probe) break;
    ProbeOutcome po;
    po.key = probe->digits();
    try {
      const Bits out = decode_with(cw, *probe, cfg.precision);
      for (std::size_t t = 0; t < out.size(); ++t) {
        if (out[t] != session.message[t]) {
          if (!po.first_mismatch) po.first_mismatch = t;
          ++po.mismatches;
        }
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Decode) throw;
      po.decode_error = true;
    }
    r.non_pool_probes.push_back(std::move(po));
  }

  if (cfg.m <= 4) {
    r.brute_force = brute_force_valid_keys(cw, session.message, session.pool, cfg.precision);
  }
  return r;
}

BruteForceResult brute_force_valid_keys(const Codeword& cw, const Bits& plaintext,
                                        const KeyPoolSpec& pool, int precision) {
  const std::size_t m = cw.header.m_len;
  if (m > 4) fail(ErrorKind::Capacity, "brute force is limited to M <= 4");
  if (pool.size() != m) fail(ErrorKind::Key, "pool length differs from the stream's M");

  BruteForceResult r;
  r.keyspace = std::size_t{1} << (3 * m);
  std::vector<MapMode> modes(m);
  for (std::size_t idx = 0; idx < r.keyspace; ++idx) {
    for (std::size_t i = 0; i < m; ++i) {
      modes[i] = MapMode(1 + static_cast<int>((idx >> (3 * (m - 1 - i))) & 7u));
    }
    EncryptionKey key(modes, pool.tail());
    try {
      if (decode_with(cw, key, precision) == plaintext) r.valid.push_back(std::move(key));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Decode) throw;
    }
  }
  std::set<std::string> found;
  for (const auto& k : r.valid) found.insert(k.digits());
  r.contains_pool = true;
  if (m <= kMaxEnumerableM) {
    for (const auto& k : pool.enumerate()) {
      if (!found.contains(k.digits())) r.contains_pool = false;
    }
  }
  return r;
}

EncryptionKey collude(const std::vector<EncryptionKey>& keys, const Seed& seed) {
  if (keys.size() < 2) fail(ErrorKind::Config, "collusion needs at least two keys");
  const std::size_t m = keys.front().size();
  for (const auto& k : keys) {
    if (k.size() != m || k.tail() != keys.front().tail()) {
      fail(ErrorKind::Key, "colluding keys come from different sessions");
    }
  }
  SeedStream stream(seed, "bcac/collude/v1");
  std::vector<MapMode> modes;
  modes.reserve(m);
  const auto count = static_cast<std::uint32_t>(keys.size());
  for (std::size_t i = 0; i < m; ++i) modes.push_back(keys[stream.below(count)].modes()[i]);
  return EncryptionKey(std::move(modes), keys.front().tail());
}

TraceSummary run_trace_experiment(const SimConfig& cfg) {
  check_capacity(cfg);
  if (cfg.collude_k > cfg.users) fail(ErrorKind::Config, "collusion group larger than user count");
  const Session session = make_session(cfg);
  const WrappingScheme& scheme = scheme_by_name(cfg.scheme);

  TraceSummary s;
  s.users = cfg.users;
  s.m = cfg.m;
  s.collude_k = cfg.collude_k;
  s.trials = cfg.trials;
  s.wrapping_enabled = scheme.name() != "NULL-TEST";

  KeyLedger ledger("trace-" + cfg.seed.to_hex().substr(0, 16), session.pool);
  std::vector<EncryptionKey> issued;
  for (std::size_t i = 0; i < cfg.users; ++i) {
    const std::string user = user_name(i);
    issued.push_back(sample_user_key(session.pool, user, ledger, cfg.seed));
    const RecipientKeys recipient = scheme.make_recipient(user, cfg.seed);
    const auto blob = wrap_key(issued.back(), recipient.pub, scheme).to_blob();
    s.raw_key_on_wire =
        s.raw_key_on_wire || contains_subsequence(blob, serialize_key_payload(issued.back()));
  }
  if (issued.empty()) return s;

  SeedStream stream(cfg.seed, "bcac/trace/v1");
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::size_t who = stream.below(static_cast<std::uint32_t>(issued.size()));
    const TraceResult tr = trace_key(issued[who], ledger);
    if (tr.verdict == TraceVerdict::Attributed && tr.user == user_name(who)) {
      ++s.leak_attributed_correctly;
    }
  }

  if (cfg.collude_k >= 2) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      // Pick K distinct colluders by partial Fisher-Yates.
      std::vector<std::size_t> order(issued.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::vector<EncryptionKey> group;
      std::set<std::string> colluders;
      for (std::size_t i = 0; i < cfg.collude_k; ++i) {
        const std::size_t j = i + stream.below(static_cast<std::uint32_t>(order.size() - i));
        std::swap(order[i], order[j]);
        group.push_back(issued[order[i]]);
        colluders.insert(user_name(order[i]));
      }
      Seed mix_seed = cfg.seed;
      for (std::size_t i = 0; i < 8; ++i) mix_seed.bytes[24 + i] ^= static_cast<std::uint8_t>(t >> (8 * i));
      const EncryptionKey mix = collude(group, mix_seed);

      ++s.mix_trials;
      const TraceResult tr = trace_key(mix, ledger);
      switch (tr.verdict) {
        case TraceVerdict::Attributed: {
          if (ledger.key_of(*tr.user) != mix) {
            ++s.mix_misattributed;
          } else if (colluders.contains(*tr.user)) {
            ++s.mix_attributed_to_colluder;
          } else {
            ++s.mix_attributed_to_innocent;
          }
          break;
        }
        case TraceVerdict::CollusionSuspected:
          ++s.mix_collusion_suspected;
          break;
        case TraceVerdict::Unknown:
          ++s.mix_unknown;
          break;
      }
    }
  }

  for (std::size_t t = 0; t < cfg.trials; ++t) {
    auto probe = random_non_pool_key(stream, session.pool);
    if (!probe) break;
    ++s.non_pool_trials;
    if (trace_key(*probe, ledger).verdict == TraceVerdict::Unknown) ++s.non_pool_unknown;
  }
  return s;
}

nlohmann::ordered_json to_json(const PoolMath& pm) {
  nlohmann::ordered_json j;
  j["valid"] = pm.valid.get_str();
  j["total"] = pm.total.get_str();
  j["guess_prob"] = pm.guess_prob.get_str();
  return j;
}

nlohmann::ordered_json to_json(const SimReport& r) {
  nlohmann::ordered_json j;
  j["users"] = r.users;
  j["n"] = r.n;
  j["m"] = r.m;
  j["p_num"] = r.p_num;
  j["coder"] = r.coder;
  j["scheme"] = r.scheme;
  j["original_key"] = r.original_key;
  j["payload_bits"] = r.payload_bits;
  j["ciphertext_bytes"] = r.ciphertext_bytes;
  j["rate"] = r.rate;
  j["entropy"] = r.entropy;
  j["length_bound"] = {r.bound.lower, r.bound.upper};
  j["ciphertext_sha256"] = r.ciphertext_sha256;
  j["single_ciphertext"] = r.single_ciphertext;
  j["successes"] = r.successes;
  auto& users = j["per_user"] = nlohmann::ordered_json::array();
  for (const auto& u : r.per_user) {
    users.push_back({{"user", u.user}, {"key", u.key}, {"decoded_ok", u.decoded_ok},
                     {"wrapped_bytes", u.wrapped_bytes}});
  }
  j["key_payload_bits_per_user"] = r.key_payload_bits_per_user;
  j["wrap_overhead_bytes"] = r.wrap_overhead_bytes;
  j["total_key_bits"] = r.total_key_bits;
  j["raw_key_on_wire"] = r.raw_key_on_wire;
  j["pool"] = to_json(r.pool);
  auto& probes = j["non_pool_probes"] = nlohmann::ordered_json::array();
  for (const auto& p : r.non_pool_probes) {
    nlohmann::ordered_json pj{{"key", p.key}, {"mismatches", p.mismatches},
                              {"decode_error", p.decode_error}};
    pj["first_mismatch"] = p.first_mismatch ? nlohmann::ordered_json(*p.first_mismatch) : nullptr;
    probes.push_back(std::move(pj));
  }
  if (r.brute_force) {
    nlohmann::ordered_json bf;
    bf["keyspace"] = r.brute_force->keyspace;
    bf["valid_count"] = r.brute_force->valid.size();
    bf["contains_pool"] = r.brute_force->contains_pool;
    auto& keys = bf["valid"] = nlohmann::ordered_json::array();
    for (const auto& k : r.brute_force->valid) keys.push_back(k.digits());
    j["brute_force"] = std::move(bf);
  } else {
    j["brute_force"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json to_json(const TraceSummary& s) {
  nlohmann::ordered_json j;
  j["users"] = s.users;
  j["m"] = s.m;
  j["collude_k"] = s.collude_k;
  j["trials"] = s.trials;
  j["leak_attributed_correctly"] = s.leak_attributed_correctly;
  j["mix"] = {{"trials", s.mix_trials},
              {"attributed_to_colluder", s.mix_attributed_to_colluder},
              {"attributed_to_innocent", s.mix_attributed_to_innocent},
              {"misattributed", s.mix_misattributed},
              {"collusion_suspected", s.mix_collusion_suspected},
              {"unknown", s.mix_unknown}};
  j["non_pool"] = {{"trials", s.non_pool_trials}, {"unknown", s.non_pool_unknown}};
  j["wrapping_enabled"] = s.wrapping_enabled;
  j["raw_key_on_wire"] = s.raw_key_on_wire;
  return j;
}

}  // namespace bcac
