#pragma once

// Binary chaotic arithmetic coding under a per-position mode key.
//
// Two coders share one container format:
//  * the exact coder composes the decode affines as dyadic rationals and
//    emits a canonical codeword; it serves as the reference,
//  * the stream coder runs in P-bit integer registers with the usual
//    E1/E2/E3 renormalization.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcac/bits.hpp"
#include "bcac/key.hpp"
#include "bcac/maps.hpp"

namespace bcac {

/// P('0') quantized to num / 65536, the resolution carried in stream headers.
class Probability {
 public:
  static constexpr std::uint32_t kScaleBits = 16;
  static constexpr std::uint32_t kScale = 1u << kScaleBits;

  explicit Probability(std::uint32_t num);

  /// Nearest representable value; exact inputs with denominator 65536 survive.
  static Probability from_rational(const Rational& p);
  static Probability from_double(double p);

  std::uint16_t num() const noexcept { return static_cast<std::uint16_t>(num_); }
  /// Width numerator of a symbol's interval, over 65536.
  std::uint32_t width_num(int bit) const noexcept { return bit == 0 ? num_ : kScale - num_; }
  Rational value() const { return Rational(num_, kScale); }
  double as_double() const noexcept { return static_cast<double>(num_) / kScale; }

  friend bool operator==(Probability, Probability) = default;

 private:
  std::uint32_t num_;
};

struct StreamHeader {
  static constexpr std::array<char, 4> kMagic = {'C', 'A', 'C', '1'};
  static constexpr std::uint8_t kVersion = 1;
  /// magic(4) + version(1) + p_num(2) + m_len(4) + n_bits(8) + payload_len_bits(8)
  static constexpr std::size_t kSize = 27;

  std::uint8_t version = kVersion;
  std::uint16_t p_num = 0;
  std::uint32_t m_len = 0;
  std::uint64_t n_bits = 0;
  std::uint64_t payload_len_bits = 0;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

struct Codeword {
  StreamHeader header;
  Bits payload;

  Probability probability() const { return Probability(header.p_num); }

  /// Header (little-endian) followed by the payload packed MSB-first.
  std::vector<std::uint8_t> serialize() const;
  static Codeword parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Codeword&, const Codeword&) = default;
};

/// Final interval of the exact coder: [low, low + width), with `descending`
/// set when the composed map reverses orientation.
struct ExactInterval {
  Rational low;
  Rational width;
  bool descending = false;
};

ExactInterval exact_interval(std::span<const std::uint8_t> bits, Probability p,
                             const EncryptionKey& key);

Codeword encode_exact(std::span<const std::uint8_t> bits, Probability p, const EncryptionKey& key);
Bits decode_exact(const Codeword& cw, const EncryptionKey& key);

struct LengthBound {
  std::uint64_t lower;
  std::uint64_t upper;
  friend bool operator==(const LengthBound&, const LengthBound&) = default;
};

/// (ceil(-log2 W), ceil(-log2 W) + 1) where W is the product of symbol widths.
LengthBound code_length_bound(std::span<const std::uint8_t> bits, Probability p);

/// Shannon entropy of the binary source in bits per symbol.
double binary_entropy(Probability p);

constexpr int kDefaultPrecision = 32;
constexpr int kMinPrecision = 16;
constexpr int kMaxPrecision = 62;

/// Incremental P-bit encoder. Bits go in one at a time; finish() appends the
/// terminating codeword bits and returns the payload.
class StreamEncoder {
 public:
  StreamEncoder(Probability p, int precision = kDefaultPrecision);

  void encode(int bit, MapMode mode);
  Bits finish();

 private:
  void emit(int bit);

  Probability p_;
  int precision_;
  std::uint64_t half_, quarter_;
  std::uint64_t low_, high_;
  std::uint64_t pending_ = 0;
  bool flipped_ = false;
  Bits out_;
};

class StreamDecoder {
 public:
  StreamDecoder(Probability p, std::span<const std::uint8_t> payload,
                int precision = kDefaultPrecision);

  int decode(MapMode mode);

 private:
  int next_bit();

  Probability p_;
  int precision_;
  std::span<const std::uint8_t> payload_;
  std::size_t cursor_ = 0;
  std::uint64_t half_, quarter_;
  std::uint64_t low_, high_, value_ = 0;
  bool flipped_ = false;
};

Codeword encode_stream(std::span<const std::uint8_t> bits, Probability p, const EncryptionKey& key,
                       int precision = kDefaultPrecision);
Bits decode_stream(const Codeword& cw, const EncryptionKey& key, int precision = kDefaultPrecision);

}  // namespace bcac
