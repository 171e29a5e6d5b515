#pragma once

// Piecewise-linear chaotic maps: the N-ary construction and the eight
// binary coding modes with their exact parameter tables.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace bcac {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Symbol probabilities, exact. For the binary coder probs = {P('0'), P('1')}.
class SymbolModel {
 public:
  explicit SymbolModel(std::vector<Rational> probs);

  /// Binary model with P('0') = p.
  static SymbolModel binary(const Rational& p);

  std::size_t size() const noexcept { return probs_.size(); }
  const Rational& prob(std::size_t symbol) const { return probs_.at(symbol); }
  const std::vector<Rational>& probs() const noexcept { return probs_; }

 private:
  std::vector<Rational> probs_;
};

enum class Orientation : std::uint8_t { Positive, Negative };

/// One linear branch of the map, covering [beg, end) on the x axis.
struct LinearPiece {
  Rational beg;
  Rational end;
  Orientation orientation = Orientation::Positive;
  std::size_t symbol = 0;

  Rational width() const { return end - beg; }
  bool contains(const Rational& x) const { return beg <= x && x < end; }
};

/// Arrangement of an N-ary map: slot k holds symbol permutation[k] with
/// orientations[k].
struct NaryMapSpec {
  SymbolModel model;
  std::vector<std::size_t> permutation;
  std::vector<Orientation> orientations;
};

/// Number of distinct arrangements of an N-piece map, N! * 2^N.
BigInt keyspace_size(long alphabet_size);

/// Bits needed to index one arrangement, ceil(log2(N! * 2^N)).
long key_bits(long alphabet_size);

/// Lay out the pieces contiguously from 0 in slot order.
std::vector<LinearPiece> build_nary_map(const NaryMapSpec& spec);

struct MapOutput {
  std::size_t symbol;
  Rational y;
};

/// Evaluate the full map at x in [0,1): find the containing piece and
/// stretch (or reflect) it onto [0,1].
MapOutput map_forward(const std::vector<LinearPiece>& pieces, const Rational& x);

/// One of the eight binary map arrangements, numbered 1..8.
class MapMode {
 public:
  constexpr MapMode() = default;
  explicit MapMode(int digit);

  static constexpr int kCount = 8;

  constexpr int digit() const noexcept { return digit_; }
  constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(digit_ - 1); }
  char as_char() const noexcept { return static_cast<char>('0' + digit_); }

  friend constexpr bool operator==(MapMode, MapMode) = default;
  friend constexpr auto operator<=>(MapMode, MapMode) = default;

 private:
  int digit_ = 1;
};

/// Full parameter column for one mode at a given p.
///
/// Decoding symbol '0' maps y -> m1*y + b1 (and '1' maps y -> m2*y + b2).
/// The forward map is n1*x + c1 for x <= k and n2*x + c2 above k. The
/// '0' interval is [i1, i2), the '1' interval [i3, i4).
struct BcacParams {
  Rational m1, b1, m2, b2;
  Rational n1, c1, n2, c2;
  Rational i1, i2, i3, i4;
  Rational k;

  /// Decode affine for a bit, as (slope, intercept).
  std::pair<Rational, Rational> decode_affine(int bit) const {
    return bit == 0 ? std::pair{m1, b1} : std::pair{m2, b2};
  }
  /// Forward map evaluated at x, branch chosen by x <= k.
  Rational forward(const Rational& x) const {
    return x <= k ? Rational(n1 * x + c1) : Rational(n2 * x + c2);
  }
};

BcacParams bcac_params(MapMode mode, const Rational& p);

/// The other mode that decodes `bit` identically to `mode`.
MapMode twin_mode(MapMode mode, int bit);

/// Sign and placement structure of a mode, independent of p. Used by the
/// integer coder, which never materializes rationals.
struct ModeLayout {
  bool zero_on_top;                // '0' interval sits above the '1' interval
  std::array<bool, 2> negative;    // decode affine slope sign per bit
};

const ModeLayout& mode_layout(MapMode mode);

}  // namespace bcac
