#pragma once

// Pluggable key wrapping for distribution. Two schemes are built in:
//
//   NULL-TEST  (id 0x00) a test double. The key travels in the clear with an
//              integrity tag; it offers no confidentiality whatsoever.
//   SEALBOX    (id 0x01) libsodium sealed boxes (X25519 + XSalsa20-Poly1305).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bcac/key.hpp"
#include "bcac/keying.hpp"

namespace bcac {

struct RecipientPublic {
  std::string id;
  std::vector<std::uint8_t> public_key;
};

struct RecipientKeys {
  RecipientPublic pub;
  std::vector<std::uint8_t> secret_key;
};

class WrappingScheme {
 public:
  virtual ~WrappingScheme() = default;

  virtual std::uint8_t id() const noexcept = 0;
  virtual std::string_view name() const noexcept = 0;
  /// Bytes added on top of the plaintext by seal().
  virtual std::size_t overhead_bytes() const noexcept = 0;

  /// Deterministic recipient key material derived from a seed.
  virtual RecipientKeys make_recipient(const std::string& id, const Seed& seed) const = 0;

  virtual std::vector<std::uint8_t> seal(std::span<const std::uint8_t> plaintext,
                                         const RecipientPublic& to) const = 0;
  /// Throws ErrorKind::Wrap when the ciphertext does not authenticate.
  virtual std::vector<std::uint8_t> open(std::span<const std::uint8_t> ciphertext,
                                         const RecipientKeys& self) const = 0;
};

/// Built-in schemes by wire id or name ("NULL-TEST", "SEALBOX").
const WrappingScheme& scheme_by_id(std::uint8_t id);
const WrappingScheme& scheme_by_name(std::string_view name);

struct WrappedKey {
  std::string recipient;
  std::uint8_t scheme_id = 0;
  std::vector<std::uint8_t> ciphertext;

  /// scheme-id byte, u32 little-endian length, ciphertext.
  std::vector<std::uint8_t> to_blob() const;
  static WrappedKey from_blob(std::span<const std::uint8_t> blob, std::string recipient = {});
};

/// Wrapped plaintext layout: u32 LE M, tail digit byte, 3M packed key bits.
constexpr std::size_t kKeyFramingBytes = 5;

std::vector<std::uint8_t> serialize_key_payload(const EncryptionKey& key);
EncryptionKey parse_key_payload(std::span<const std::uint8_t> bytes);

WrappedKey wrap_key(const EncryptionKey& key, const RecipientPublic& to,
                    const WrappingScheme& scheme);
EncryptionKey unwrap_key(const WrappedKey& wrapped, const RecipientKeys& self,
                         const WrappingScheme& scheme);

}  // namespace bcac
