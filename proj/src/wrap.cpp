#include "bcac/wrap.hpp"

#include <algorithm>
#include <array>

#include <sodium.h>

#include "bcac/error.hpp"
#include "sodium_init.hpp"

namespace bcac {

namespace {

constexpr std::string_view kNullTag = "NULL-TEST";
constexpr std::size_t kNullTagBytes = 16;

class NullTestScheme final : public WrappingScheme {
 public:
  std::uint8_t id() const noexcept override { return 0x00; }
  std::string_view name() const noexcept override { return kNullTag; }
  std::size_t overhead_bytes() const noexcept override { return kNullTagBytes; }

  RecipientKeys make_recipient(const std::string& id, const Seed&) const override {
    RecipientKeys k;
    k.pub.id = id;
    k.pub.public_key.assign(id.begin(), id.end());
    k.secret_key = k.pub.public_key;
    return k;
  }

  std::vector<std::uint8_t> seal(std::span<const std::uint8_t> plaintext,
                                 const RecipientPublic& to) const override {
    std::vector<std::uint8_t> out(plaintext.begin(), plaintext.end());
    const auto t = tag(plaintext, to.public_key);
    out.insert(out.end(), t.begin(), t.end());
    return out;
  }

  std::vector<std::uint8_t> open(std::span<const std::uint8_t> ciphertext,
                                 const RecipientKeys& self) const override {
    if (ciphertext.size() < kNullTagBytes) fail(ErrorKind::Wrap, "NULL-TEST blob too short");
    const auto body = ciphertext.first(ciphertext.size() - kNullTagBytes);
    const auto expect = tag(body, self.pub.public_key);
    if (sodium_memcmp(expect.data(), ciphertext.data() + body.size(), kNullTagBytes) != 0) {
      fail(ErrorKind::Wrap, "NULL-TEST integrity tag mismatch");
    }
    return {body.begin(), body.end()};
  }

 private:
  static std::array<std::uint8_t, kNullTagBytes> tag(std::span<const std::uint8_t> body,
                                                    std::span<const std::uint8_t> recipient) {
    ensure_sodium();
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, kNullTagBytes);
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kNullTag.data()),
                              kNullTag.size());
    const std::uint8_t len = static_cast<std::uint8_t>(std::min<std::size_t>(recipient.size(), 255));
    crypto_generichash_update(&st, &len, 1);
    crypto_generichash_update(&st, recipient.data(), len);
    crypto_generichash_update(&st, body.data(), body.size());
    std::array<std::uint8_t, kNullTagBytes> out{};
    crypto_generichash_final(&st, out.data(), out.size());
    return out;
  }
};

class SealedBoxScheme final : public WrappingScheme {
 public:
  std::uint8_t id() const noexcept override { return 0x01; }
  std::string_view name() const noexcept override { return "SEALBOX"; }
  std::size_t overhead_bytes() const noexcept override { return crypto_box_SEALBYTES; }

  RecipientKeys make_recipient(const std::string& id, const Seed& seed) const override {
    ensure_sodium();
    std::array<std::uint8_t, crypto_box_SEEDBYTES> kseed{};
    crypto_generichash(kseed.data(), kseed.size(), reinterpret_cast<const unsigned char*>(id.data()),
                       id.size(), seed.bytes.data(), seed.bytes.size());
    RecipientKeys k;
    k.pub.id = id;
    k.pub.public_key.resize(crypto_box_PUBLICKEYBYTES);
    k.secret_key.resize(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(k.pub.public_key.data(), k.secret_key.data(), kseed.data());
    sodium_memzero(kseed.data(), kseed.size());
    return k;
  }

  std::vector<std::uint8_t> seal(std::span<const std::uint8_t> plaintext,
                                 const RecipientPublic& to) const override {
    ensure_sodium();
    if (to.public_key.size() != crypto_box_PUBLICKEYBYTES) {
      fail(ErrorKind::Wrap, "SEALBOX recipient public key has the wrong size");
    }
    std::vector<std::uint8_t> out(plaintext.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), to.public_key.data());
    return out;
  }

  std::vector<std::uint8_t> open(std::span<const std::uint8_t> ciphertext,
                                 const RecipientKeys& self) const override {
    ensure_sodium();
    if (ciphertext.size() < crypto_box_SEALBYTES) fail(ErrorKind::Wrap, "SEALBOX blob too short");
    if (self.pub.public_key.size() != crypto_box_PUBLICKEYBYTES ||
        self.secret_key.size() != crypto_box_SECRETKEYBYTES) {
      fail(ErrorKind::Wrap, "SEALBOX recipient key material has the wrong size");
    }
    std::vector<std::uint8_t> out(ciphertext.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(),
                             self.pub.public_key.data(), self.secret_key.data()) != 0) {
      fail(ErrorKind::Wrap, "SEALBOX authentication failed");
    }
    return out;
  }
};

const NullTestScheme kNullScheme;
const SealedBoxScheme kSealScheme;

}  // namespace

const WrappingScheme& scheme_by_id(std::uint8_t id) {
  if (id == kNullScheme.id()) return kNullScheme;
  if (id == kSealScheme.id()) return kSealScheme;
  fail(ErrorKind::Wrap, "unknown wrapping scheme id " + std::to_string(id));
}

const WrappingScheme& scheme_by_name(std::string_view name) {
  if (name == kNullScheme.name()) return kNullScheme;
  if (name == kSealScheme.name()) return kSealScheme;
  fail(ErrorKind::Wrap, "unknown wrapping scheme " + std::string(name));
}

std::vector<std::uint8_t> WrappedKey::to_blob() const {
  std::vector<std::uint8_t> out;
  out.reserve(5 + ciphertext.size());
  out.push_back(scheme_id);
  const auto len = static_cast<std::uint32_t>(ciphertext.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  return out;
}

WrappedKey WrappedKey::from_blob(std::span<const std::uint8_t> blob, std::string recipient) {
  if (blob.size() < 5) fail(ErrorKind::Format, "wrapped-key blob shorter than its framing");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(blob[1 + i]) << (8 * i);
  if (blob.size() != 5 + static_cast<std::size_t>(len)) {
    fail(ErrorKind::Format, "wrapped-key blob length field disagrees with its size");
  }
  WrappedKey w;
  w.recipient = std::move(recipient);
  w.scheme_id = blob[0];
  w.ciphertext.assign(blob.begin() + 5, blob.end());
  return w;
}

std::vector<std::uint8_t> serialize_key_payload(const EncryptionKey& key) {
  std::vector<std::uint8_t> out;
  const auto m = static_cast<std::uint32_t>(key.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(m >> (8 * i)));
  out.push_back(static_cast<std::uint8_t>(key.tail().digit()));
  const auto packed = key.pack();
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

EncryptionKey parse_key_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kKeyFramingBytes) fail(ErrorKind::Key, "key payload too short");
  std::uint32_t m = 0;
  for (int i = 0; i < 4; ++i) m |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return EncryptionKey::unpack(bytes.subspan(kKeyFramingBytes), m, MapMode(bytes[4]));
}

WrappedKey wrap_key(const EncryptionKey& key, const RecipientPublic& to,
                    const WrappingScheme& scheme) {
  WrappedKey w;
  w.recipient = to.id;
  w.scheme_id = scheme.id();
  w.ciphertext = scheme.seal(serialize_key_payload(key), to);
  return w;
}

EncryptionKey unwrap_key(const WrappedKey& wrapped, const RecipientKeys& self,
                         const WrappingScheme& scheme) {
  if (wrapped.scheme_id != scheme.id()) {
    fail(ErrorKind::Wrap, "blob was wrapped with scheme id " + std::to_string(wrapped.scheme_id) +
                              ", not " + std::string(scheme.name()));
  }
  return parse_key_payload(scheme.open(wrapped.ciphertext, self));
}

}  // namespace bcac
