#include <doctest.h>

#include "bcac/error.hpp"
#include "bcac/wrap.hpp"

using namespace bcac;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("key payload framing") {
  const auto key = EncryptionKey::from_digits("136", MapMode(2));
  const auto bytes = serialize_key_payload(key);
  CHECK(bytes == std::vector<std::uint8_t>{3, 0, 0, 0, 2, 0x0A, 0x80});
  CHECK(parse_key_payload(bytes) == key);
  CHECK(kind_of([] { parse_key_payload(std::vector<std::uint8_t>{3, 0}); }) == ErrorKind::Key);
  CHECK(kind_of([] { parse_key_payload(std::vector<std::uint8_t>{3, 0, 0, 0, 1, 0}); }) ==
        ErrorKind::Key);
  CHECK(kind_of([] { parse_key_payload(std::vector<std::uint8_t>{0, 0, 0, 0, 9}); }) == ErrorKind::Key);
}

TEST_CASE("both schemes round trip and reject tampering") {
  const Seed seed = Seed::from_u64(5);
  for (const char* name : {"NULL-TEST", "SEALBOX"}) {
    CAPTURE(name);
    const auto& scheme = scheme_by_name(name);
    CHECK(&scheme_by_id(scheme.id()) == &scheme);
    const auto alice = scheme.make_recipient("alice", seed);
    const auto bob = scheme.make_recipient("bob", seed);

    for (std::size_t m : {0u, 3u, 128u}) {
      const auto key = keygen(seed, m);
      const auto wrapped = wrap_key(key, alice.pub, scheme);
      CHECK(wrapped.recipient == "alice");
      CHECK(unwrap_key(wrapped, alice, scheme) == key);

      const auto blob = wrapped.to_blob();
      const std::size_t payload = kKeyFramingBytes + (3 * m + 7) / 8;
      CHECK(blob.size() == 5 + payload + scheme.overhead_bytes());
      CHECK(WrappedKey::from_blob(blob, "alice").ciphertext == wrapped.ciphertext);

      for (std::size_t i = 0; i < wrapped.ciphertext.size(); i += 7) {
        auto bad = wrapped;
        bad.ciphertext[i] ^= 0x01;
        CHECK(kind_of([&] { unwrap_key(bad, alice, scheme); }) == ErrorKind::Wrap);
      }
      CHECK(kind_of([&] { unwrap_key(wrapped, bob, scheme); }) == ErrorKind::Wrap);
    }
  }
  CHECK(kind_of([] { scheme_by_name("RSA"); }) == ErrorKind::Wrap);
  CHECK(kind_of([] { scheme_by_id(9); }) == ErrorKind::Wrap);

  const auto& null = scheme_by_name("NULL-TEST");
  const auto& seal = scheme_by_name("SEALBOX");
  const auto r = seal.make_recipient("alice", seed);
  const auto w = wrap_key(EncryptionKey::from_digits("1"), r.pub, seal);
  CHECK(kind_of([&] { unwrap_key(w, r, null); }) == ErrorKind::Wrap);
  CHECK(seal.make_recipient("alice", seed).pub.public_key == r.pub.public_key);
  CHECK(seal.make_recipient("alice", Seed::from_u64(6)).pub.public_key != r.pub.public_key);
}

TEST_CASE("blob framing errors") {
  CHECK(kind_of([] { WrappedKey::from_blob(std::vector<std::uint8_t>{1, 2}); }) == ErrorKind::Format);
  CHECK(kind_of([] { WrappedKey::from_blob(std::vector<std::uint8_t>{1, 3, 0, 0, 0, 9}); }) ==
        ErrorKind::Format);
}
