#pragma once

// Test-only reference computations. Everything here works on plain mpq
// rationals straight from the parameter table and shares no code path with
// the dyadic-integer coder or the register coder.

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "bcac/bits.hpp"
#include "bcac/key.hpp"
#include "bcac/maps.hpp"

namespace oracle {

using bcac::Bits;
using bcac::EncryptionKey;
using bcac::Rational;

/// Compose decode affines left to right: F = T_1 o ... o T_n. Returns the
/// ordered endpoints of F([0,1]).
inline std::pair<Rational, Rational> interval(const Bits& bits, const Rational& p,
                                              const EncryptionKey& key) {
  Rational slope = 1, intercept = 0;
  for (std::size_t t = 0; t < bits.size(); ++t) {
    auto [m, b] = bcac::bcac_params(key.mode_at(t), p).decode_affine(bits[t]);
    intercept = slope * b + intercept;
    slope = slope * m;
  }
  Rational a = intercept, z = slope + intercept;
  if (a > z) std::swap(a, z);
  return {a, z};
}

/// Iterate the forward map from x, reading the symbol off the branch taken.
/// Returns nullopt if the orbit leaves [0,1].
inline std::optional<Bits> forward_decode(Rational x, std::size_t n, const Rational& p,
                                          const EncryptionKey& key) {
  Bits out;
  for (std::size_t t = 0; t < n; ++t) {
    if (x < 0 || x > 1) return std::nullopt;
    const auto prm = bcac::bcac_params(key.mode_at(t), p);
    const int lower_symbol = prm.i1 == 0 ? 0 : 1;
    out.push_back(static_cast<std::uint8_t>(x <= prm.k ? lower_symbol : 1 - lower_symbol));
    x = prm.forward(x);
  }
  return out;
}

/// Value of a payload read as a binary fraction.
inline Rational payload_value(const Bits& payload) {
  bcac::BigInt num = 0, den = 1;
  for (auto b : payload) {
    num = num * 2 + b;
    den *= 2;
  }
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Smallest L with 2^-L <= width, by counting.
inline std::size_t ceil_neg_log2(const Rational& width) {
  std::size_t l = 0;
  Rational step = 1;
  while (step > width) {
    step /= 2;
    ++l;
  }
  return l;
}

/// Enumerate every k-bit string for k = 0..max_bits in order and return the
/// first, of length at least ceil(-log2 width), strictly inside (lo, hi).
inline std::optional<Bits> shortest_dyadic(const Rational& lo, const Rational& hi,
                                           std::size_t max_bits) {
  const std::size_t min_len = ceil_neg_log2(hi - lo);
  for (std::size_t k = 0; k <= max_bits; ++k) {
    if (k < min_len) continue;
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << k); ++j) {
      Bits cand(k);
      for (std::size_t i = 0; i < k; ++i) cand[i] = (j >> (k - 1 - i)) & 1u;
      const Rational v = payload_value(cand);
      if (lo < v && v < hi) return cand;
    }
  }
  return std::nullopt;
}

inline Bits random_bits(std::mt19937_64& rng, std::size_t n) {
  Bits out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 1u);
  return out;
}

inline EncryptionKey random_key(std::mt19937_64& rng, std::size_t m) {
  std::vector<bcac::MapMode> modes;
  for (std::size_t i = 0; i < m; ++i) modes.emplace_back(1 + static_cast<int>(rng() % 8));
  return EncryptionKey(std::move(modes));
}

/// Fixed-composition message: exactly `zeros` zero bits, shuffled.
inline Bits fixed_composition(std::mt19937_64& rng, std::size_t n, std::size_t zeros) {
  Bits out(n, 1);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(zeros), 0);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace oracle
