#include "bcac/key.hpp"

#include <charconv>
#include <sstream>

#include "bcac/bits.hpp"
#include "bcac/error.hpp"

namespace bcac {

EncryptionKey EncryptionKey::from_digits(std::string_view digits, MapMode tail) {
  std::vector<MapMode> modes;
  modes.reserve(digits.size());
  for (char c : digits) {
    if (c < '1' || c > '8') {
      fail(ErrorKind::Key, std::string("key digit must be 1..8, got '") + c + "'");
    }
    modes.emplace_back(c - '0');
  }
  return EncryptionKey(std::move(modes), tail);
}

std::string EncryptionKey::digits() const {
  std::string out;
  out.reserve(modes_.size());
  for (auto m : modes_) out.push_back(m.as_char());
  return out;
}

std::vector<std::uint8_t> EncryptionKey::pack() const {
  Bits bits;
  bits.reserve(modes_.size() * 3);
  for (auto m : modes_) {
    const int v = m.digit() - 1;
    bits.push_back(static_cast<std::uint8_t>((v >> 2) & 1));
    bits.push_back(static_cast<std::uint8_t>((v >> 1) & 1));
    bits.push_back(static_cast<std::uint8_t>(v & 1));
  }
  return pack_bits(bits);
}

EncryptionKey EncryptionKey::unpack(std::span<const std::uint8_t> bytes, std::size_t m,
                                    MapMode tail) {
  if (bytes.size() != (3 * m + 7) / 8) {
    fail(ErrorKind::Key, "packed key has " + std::to_string(bytes.size()) +
                             " bytes, expected " + std::to_string((3 * m + 7) / 8));
  }
  const Bits bits = unpack_bits(bytes, 3 * m);
  std::vector<MapMode> modes;
  modes.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    modes.emplace_back(1 + (bits[3 * i] << 2 | bits[3 * i + 1] << 1 | bits[3 * i + 2]));
  }
  return EncryptionKey(std::move(modes), tail);
}

std::string EncryptionKey::to_key_line() const {
  std::ostringstream os;
  os << "CACKEY v1 M=" << modes_.size() << " tail=" << tail_.digit() << " key=" << digits();
  return os.str();
}

namespace {

std::string_view field_value(std::string_view token, std::string_view name) {
  if (token.size() < name.size() + 1 || token.substr(0, name.size()) != name ||
      token[name.size()] != '=') {
    fail(ErrorKind::Key, "malformed key line: expected " + std::string(name) + "=...");
  }
  return token.substr(name.size() + 1);
}

long parse_long(std::string_view s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorKind::Key, "malformed number in key line: " + std::string(s));
  }
  return v;
}

}  // namespace

EncryptionKey EncryptionKey::from_key_line(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::string magic, version, m_tok, tail_tok, key_tok, extra;
  if (!(is >> magic >> version >> m_tok >> tail_tok) || magic != "CACKEY" || version != "v1") {
    fail(ErrorKind::Key, "not a CACKEY v1 key line");
  }
  // An empty key ends the line right after "key=".
  is >> key_tok;
  if (is >> extra) fail(ErrorKind::Key, "trailing data in key line");
  if (key_tok.empty()) fail(ErrorKind::Key, "key line lacks key= field");

  const long m = parse_long(field_value(m_tok, "M"));
  const long tail = parse_long(field_value(tail_tok, "tail"));
  auto key = from_digits(field_value(key_tok, "key"), MapMode(static_cast<int>(tail)));
  if (m < 0 || static_cast<std::size_t>(m) != key.size()) {
    fail(ErrorKind::Key, "key line declares M=" + std::to_string(m) + " but carries " +
                             std::to_string(key.size()) + " digits");
  }
  return key;
}

}  // namespace bcac
