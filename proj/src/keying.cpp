#include "bcac/keying.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>

#include <sodium.h>

#include <json.hpp>

#include "bcac/error.hpp"
#include "sodium_init.hpp"

namespace bcac {

// ---------------------------------------------------------------------------
// Seeds

Seed Seed::from_u64(std::uint64_t v) {
  Seed s;
  for (std::size_t i = 0; i < 8; ++i) s.bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Seed Seed::parse(std::string_view text) {
  if (text.size() == 64) {
    Seed s;
    std::size_t bin_len = 0;
    if (sodium_hex2bin(s.bytes.data(), s.bytes.size(), text.data(), text.size(), nullptr, &bin_len,
                       nullptr) == 0 &&
        bin_len == 32) {
      return s;
    }
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorKind::Config, "seed must be 64 hex digits or a decimal integer: " + std::string(text));
  }
  return from_u64(v);
}

std::string Seed::to_hex() const {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

SeedStream::SeedStream(const Seed& seed, std::string_view label) {
  ensure_sodium();
  crypto_generichash(subkey_.data(), subkey_.size(),
                     reinterpret_cast<const unsigned char*>(label.data()), label.size(),
                     seed.bytes.data(), seed.bytes.size());
  buffer_.resize(1024);
  refill();
}

void SeedStream::refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
  for (std::size_t i = 0; i < nonce.size(); ++i) nonce[i] = static_cast<std::uint8_t>(block_ >> (8 * i));
  ++block_;
  crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce.data(), subkey_.data());
  byte_pos_ = 0;
  bit_pos_ = 0;
}

std::uint32_t SeedStream::bits(int count) {
  std::uint32_t v = 0;
  for (int i = 0; i < count; ++i) {
    if (byte_pos_ == buffer_.size()) refill();
    v = (v << 1) | ((buffer_[byte_pos_] >> (7 - bit_pos_)) & 1u);
    if (++bit_pos_ == 8) {
      bit_pos_ = 0;
      ++byte_pos_;
    }
  }
  return v;
}

std::uint32_t SeedStream::below(std::uint32_t bound) {
  if (bound == 0) fail(ErrorKind::Config, "empty sampling range");
  int width = 0;
  while ((std::uint64_t{1} << width) < bound) ++width;
  for (;;) {
    const std::uint32_t v = bits(width);
    if (v < bound) return v;
  }
}

// ---------------------------------------------------------------------------
// Mode restriction and keygen

ModeSet::ModeSet() {
  for (int d = 1; d <= MapMode::kCount; ++d) allowed_.emplace_back(d);
}

ModeSet::ModeSet(std::vector<MapMode> allowed) : allowed_(std::move(allowed)) {
  std::sort(allowed_.begin(), allowed_.end());
  allowed_.erase(std::unique(allowed_.begin(), allowed_.end()), allowed_.end());
  if (allowed_.empty()) fail(ErrorKind::Config, "mode subset must not be empty");
}

bool ModeSet::contains(MapMode m) const {
  return std::binary_search(allowed_.begin(), allowed_.end(), m);
}

ModeSet ModeSet::parse(std::string_view text) {
  std::vector<MapMode> modes;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    if (c < '1' || c > '8') fail(ErrorKind::Config, std::string("invalid mode digit '") + c + "'");
    modes.emplace_back(c - '0');
  }
  return ModeSet(std::move(modes));
}

ModeSet restrict_modes(std::span<const int> digits) {
  std::vector<MapMode> modes;
  for (int d : digits) {
    if (d < 1 || d > MapMode::kCount) {
      fail(ErrorKind::Config, "mode subset digit out of range: " + std::to_string(d));
    }
    modes.emplace_back(d);
  }
  return ModeSet(std::move(modes));
}

EncryptionKey keygen(const Seed& seed, std::size_t m, const ModeSet& modes, MapMode tail) {
  SeedStream stream(seed, "bcac/keygen/v1");
  std::vector<MapMode> digits;
  digits.reserve(m);
  const auto n = static_cast<std::uint32_t>(modes.size());
  for (std::size_t i = 0; i < m; ++i) digits.push_back(modes.modes()[stream.below(n)]);
  return EncryptionKey(std::move(digits), tail);
}

// ---------------------------------------------------------------------------
// Pools

BigInt KeyPoolSpec::pool_size() const {
  BigInt r = 1;
  r <<= static_cast<mp_bitcnt_t>(pairs_.size());
  return r;
}

EncryptionKey KeyPoolSpec::member(std::span<const std::uint8_t> flips) const {
  if (flips.size() != pairs_.size()) fail(ErrorKind::Key, "flip pattern length mismatch");
  std::vector<MapMode> modes;
  modes.reserve(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    modes.push_back(flips[i] ? pairs_[i].second : pairs_[i].first);
  }
  return EncryptionKey(std::move(modes), tail_);
}

EncryptionKey KeyPoolSpec::original() const {
  const Bits zeros(pairs_.size(), 0);
  return member(zeros);
}

std::vector<EncryptionKey> KeyPoolSpec::enumerate() const {
  if (pairs_.size() > kMaxEnumerableM) {
    fail(ErrorKind::Capacity, "pool enumeration is limited to M <= 16");
  }
  const std::size_t count = std::size_t{1} << pairs_.size();
  std::vector<EncryptionKey> out;
  out.reserve(count);
  Bits flips(pairs_.size());
  for (std::size_t idx = 0; idx < count; ++idx) {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      flips[i] = static_cast<std::uint8_t>((idx >> (pairs_.size() - 1 - i)) & 1u);
    }
    out.push_back(member(flips));
  }
  std::sort(out.begin(), out.end(),
            [](const EncryptionKey& a, const EncryptionKey& b) { return a.digits() < b.digits(); });
  return out;
}

KeyPoolSpec derive_pool(const EncryptionKey& key, std::span<const std::uint8_t> plaintext_prefix) {
  if (plaintext_prefix.size() != key.size()) {
    fail(ErrorKind::Key, "plaintext prefix has " + std::to_string(plaintext_prefix.size()) +
                             " bits but the key has " + std::to_string(key.size()) + " positions");
  }
  std::vector<std::pair<MapMode, MapMode>> pairs;
  pairs.reserve(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    const int bit = plaintext_prefix[i];
    if (bit > 1) fail(ErrorKind::Format, "plaintext elements must be 0 or 1");
    pairs.emplace_back(key.modes()[i], twin_mode(key.modes()[i], bit));
  }
  return KeyPoolSpec(std::move(pairs), key.tail());
}

bool is_pool_member(const KeyPoolSpec& pool, const EncryptionKey& key) {
  if (key.size() != pool.size()) {
    fail(ErrorKind::Key, "key length does not match the pool");
  }
  if (key.tail() != pool.tail()) return false;
  for (std::size_t i = 0; i < key.size(); ++i) {
    const auto& [orig, twin] = pool.pairs()[i];
    if (key.modes()[i] != orig && key.modes()[i] != twin) return false;
  }
  return true;
}

PoolMath pool_math(std::size_t m, std::size_t alphabet) {
  if (alphabet < 2 || alphabet > MapMode::kCount) {
    fail(ErrorKind::Config, "mode alphabet must have 2..8 members");
  }
  PoolMath r;
  r.valid = 1;
  r.valid <<= static_cast<mp_bitcnt_t>(m);
  mpz_ui_pow_ui(r.total.get_mpz_t(), alphabet, m);
  r.guess_prob = Rational(r.valid, r.total);
  r.guess_prob.canonicalize();
  return r;
}

// ---------------------------------------------------------------------------
// Ledger

namespace {

std::string entry_line(const LedgerEntry& e) {
  nlohmann::ordered_json j;
  j["session"] = e.session;
  j["user"] = e.user;
  j["key"] = e.key.digits();
  j["issued_at"] = e.issued_at;
  return j.dump();
}

}  // namespace

KeyLedger::KeyLedger(std::string session, KeyPoolSpec pool)
    : session_(std::move(session)), pool_(std::move(pool)) {}

void KeyLedger::record(const std::string& user, const EncryptionKey& key, std::string issued_at) {
  if (!is_pool_member(pool_, key)) {
    fail(ErrorKind::Key, "key " + key.digits() + " is not in this session's pool");
  }
  if (by_user_.contains(user)) fail(ErrorKind::Key, "user " + user + " already holds a key");
  const std::string digits = key.digits();
  if (by_key_.contains(digits)) fail(ErrorKind::Key, "key " + digits + " already issued");
  by_key_.emplace(digits, entries_.size());
  by_user_.emplace(user, entries_.size());
  entries_.push_back({session_, user, key, std::move(issued_at)});
}

std::optional<std::string> KeyLedger::user_of(const EncryptionKey& key) const {
  auto it = by_key_.find(key.digits());
  if (it == by_key_.end() || entries_[it->second].key != key) return std::nullopt;
  return entries_[it->second].user;
}

std::optional<EncryptionKey> KeyLedger::key_of(const std::string& user) const {
  auto it = by_user_.find(user);
  if (it == by_user_.end()) return std::nullopt;
  return entries_[it->second].key;
}

std::string KeyLedger::to_jsonl() const {
  std::string out;
  for (const auto& e : entries_) {
    out += entry_line(e);
    out += '\n';
  }
  return out;
}

void KeyLedger::append_jsonl(const std::filesystem::path& path, std::size_t from_entry) const {
  std::ofstream os(path, std::ios::app);
  if (!os) fail(ErrorKind::Format, "cannot open ledger " + path.string());
  for (std::size_t i = from_entry; i < entries_.size(); ++i) {
    os << entry_line(entries_[i]) << '\n';
  }
}

KeyLedger KeyLedger::load_jsonl(const std::filesystem::path& path, const std::string& session,
                                KeyPoolSpec pool) {
  KeyLedger ledger(session, std::move(pool));
  std::ifstream is(path);
  if (!is) return ledger;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (j.at("session").get<std::string>() != session) continue;
      ledger.record(j.at("user").get<std::string>(),
                    EncryptionKey::from_digits(j.at("key").get<std::string>(), ledger.pool_.tail()),
                    j.value("issued_at", std::string{}));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::Format,
           path.string() + ":" + std::to_string(lineno) + ": malformed ledger line: " + ex.what());
    }
  }
  return ledger;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EncryptionKey sample_user_key(const KeyPoolSpec& pool, const std::string& user, KeyLedger& ledger,
                              const Seed& seed) {
  if (!(ledger.pool() == pool)) fail(ErrorKind::Key, "ledger belongs to a different pool");
  if (auto existing = ledger.key_of(user)) return *existing;
  if (BigInt(ledger.size()) >= pool.pool_size()) {
    fail(ErrorKind::Capacity, "all " + pool.pool_size().get_str() + " pool keys are issued");
  }

  SeedStream stream(seed, "bcac/user-key/v1/" + user);
  Bits flips(pool.size());
  for (auto& f : flips) f = static_cast<std::uint8_t>(stream.bits(1));

  for (;;) {
    EncryptionKey candidate = pool.member(flips);
    if (!ledger.issued(candidate)) {
      ledger.record(user, candidate, utc_timestamp());
      return candidate;
    }
    // Increment the pattern as a big-endian binary counter, wrapping at 2^M.
    for (std::size_t i = flips.size(); i-- > 0;) {
      flips[i] ^= 1u;
      if (flips[i]) break;
    }
  }
}

std::string_view to_string(TraceVerdict v) {
  switch (v) {
    case TraceVerdict::Attributed:
      return "attributed";
    case TraceVerdict::CollusionSuspected:
      return "collusion-suspected";
    case TraceVerdict::Unknown:
      return "unknown";
  }
  return "unknown";
}

TraceResult trace_key(const EncryptionKey& leaked, const KeyLedger& ledger) {
  if (auto user = ledger.user_of(leaked)) return {TraceVerdict::Attributed, std::move(user)};
  if (leaked.size() == ledger.pool().size() && is_pool_member(ledger.pool(), leaked)) {
    return {TraceVerdict::CollusionSuspected, std::nullopt};
  }
  return {TraceVerdict::Unknown, std::nullopt};
}

}  // namespace bcac
