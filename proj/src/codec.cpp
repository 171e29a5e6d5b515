#include "bcac/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "bcac/error.hpp"

namespace bcac {

Probability::Probability(std::uint32_t num) : num_(num) {
  if (num == 0 || num >= kScale) {
    fail(ErrorKind::Model, "p_num must lie in 1..65535, got " + std::to_string(num));
  }
}

Probability Probability::from_rational(const Rational& p) {
  if (p <= 0 || p >= 1) {
    fail(ErrorKind::Model, "probability must lie strictly inside (0,1), got " + p.get_str());
  }
  // round(p * 65536), halves rounding up
  Rational scaled = p * kScale + Rational(1, 2);
  BigInt n = scaled.get_num() / scaled.get_den();
  auto num = static_cast<std::uint32_t>(n.get_ui());
  return Probability(std::clamp<std::uint32_t>(num, 1, kScale - 1));
}

Probability Probability::from_double(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::Model, "probability must lie strictly inside (0,1)");
  }
  return from_rational(Rational(p));
}

double binary_entropy(Probability p) {
  const double q0 = p.as_double();
  const double q1 = 1.0 - q0;
  return -(q0 * std::log2(q0) + q1 * std::log2(q1));
}

// ---------------------------------------------------------------------------
// Container

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

std::vector<std::uint8_t> Codeword::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(StreamHeader::kSize + (payload.size() + 7) / 8);
  for (char c : StreamHeader::kMagic) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(header.version);
  put_le(out, header.p_num);
  put_le(out, header.m_len);
  put_le(out, header.n_bits);
  put_le(out, header.payload_len_bits);
  auto packed = pack_bits(payload);
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

Codeword Codeword::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < StreamHeader::kSize) {
    fail(ErrorKind::Format, "stream shorter than its header");
  }
  if (std::memcmp(bytes.data(), StreamHeader::kMagic.data(), 4) != 0) {
    fail(ErrorKind::Format, "bad magic, not a CAC1 stream");
  }
  Codeword cw;
  cw.header.version = bytes[4];
  if (cw.header.version != StreamHeader::kVersion) {
    fail(ErrorKind::Format, "unsupported stream version " + std::to_string(cw.header.version));
  }
  cw.header.p_num = get_le<std::uint16_t>(bytes, 5);
  cw.header.m_len = get_le<std::uint32_t>(bytes, 7);
  cw.header.n_bits = get_le<std::uint64_t>(bytes, 11);
  cw.header.payload_len_bits = get_le<std::uint64_t>(bytes, 19);
  if (cw.header.p_num == 0) fail(ErrorKind::Format, "header p_num must be nonzero");
  if (cw.header.m_len > cw.header.n_bits) fail(ErrorKind::Format, "header m_len exceeds n_bits");

  auto body = bytes.subspan(StreamHeader::kSize);
  const std::uint64_t need = (cw.header.payload_len_bits + 7) / 8;
  if (body.size() < need) fail(ErrorKind::Format, "truncated payload");
  if (body.size() > need) fail(ErrorKind::Format, "trailing bytes after payload");
  cw.payload = unpack_bits(body, cw.header.payload_len_bits);
  if (const auto tail_bits = cw.header.payload_len_bits % 8; tail_bits != 0) {
    const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xFFu >> tail_bits);
    if (body.back() & pad_mask) fail(ErrorKind::Format, "nonzero padding bits");
  }
  return cw;
}

namespace {

StreamHeader make_header(Probability p, const EncryptionKey& key, std::size_t n_bits,
                         std::size_t payload_bits) {
  StreamHeader h;
  h.p_num = p.num();
  h.m_len = static_cast<std::uint32_t>(key.size());
  h.n_bits = n_bits;
  h.payload_len_bits = payload_bits;
  return h;
}

void check_encode_key(const EncryptionKey& key, std::size_t n_bits) {
  if (key.size() > n_bits) {
    fail(ErrorKind::Key, "key covers " + std::to_string(key.size()) +
                             " positions but the message has only " + std::to_string(n_bits));
  }
  if (key.size() > UINT32_MAX) fail(ErrorKind::Key, "key too long for the stream header");
}

void check_decode_key(const Codeword& cw, const EncryptionKey& key) {
  if (key.size() != cw.header.m_len) {
    fail(ErrorKind::Key, "stream expects a " + std::to_string(cw.header.m_len) +
                             "-position key, got " + std::to_string(key.size()));
  }
}

void check_bits(std::span<const std::uint8_t> bits) {
  if (std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b > 1; })) {
    fail(ErrorKind::Format, "message elements must be 0 or 1");
  }
}

// ---------------------------------------------------------------------------
// Exact coder
//
// With p = p_num / 2^16 every mode's decode affine has the form
// (S / 2^16) y + B / 2^16 with integer S, B. Compositions stay dyadic, so the
// coder carries integer numerators and an implied power-of-two denominator.

struct DyadicAffine {
  long slope;      // over 2^16
  long intercept;  // over 2^16
};

struct DyadicTable {
  std::array<std::array<DyadicAffine, 2>, 8> affine;
  std::array<long, 8> threshold;  // k over 2^16
  std::array<int, 8> lower_bit;   // symbol owning the x <= k branch
};

long to_scaled(const Rational& v) {
  Rational s = v * Probability::kScale;
  s.canonicalize();
  if (s.get_den() != 1) fail(ErrorKind::Model, "parameter is not a multiple of 2^-16");
  return s.get_num().get_si();
}

DyadicTable dyadic_table(Probability p) {
  DyadicTable t{};
  const Rational pv = p.value();
  for (int d = 1; d <= 8; ++d) {
    const MapMode mode(d);
    const BcacParams prm = bcac_params(mode, pv);
    t.affine[mode.index()][0] = {to_scaled(prm.m1), to_scaled(prm.b1)};
    t.affine[mode.index()][1] = {to_scaled(prm.m2), to_scaled(prm.b2)};
    t.threshold[mode.index()] = to_scaled(prm.k);
    t.lower_bit[mode.index()] = prm.i1 == 0 ? 0 : 1;
  }
  return t;
}

/// F_t = T_1 o ... o T_t as (slope, intercept) numerators over 2^(16t).
struct ExactComposition {
  BigInt slope = 1;
  BigInt intercept = 0;
  unsigned long exponent = 0;
};

ExactComposition compose(std::span<const std::uint8_t> bits, Probability p,
                         const EncryptionKey& key) {
  check_bits(bits);
  const DyadicTable table = dyadic_table(p);
  ExactComposition f;
  for (std::size_t t = 0; t < bits.size(); ++t) {
    const auto& aff = table.affine[key.mode_at(t).index()][bits[t]];
    // intercept' = slope * B + intercept * 2^16, slope' = slope * S
    f.intercept <<= Probability::kScaleBits;
    mpz_addmul_ui(f.intercept.get_mpz_t(), f.slope.get_mpz_t(),
                  static_cast<unsigned long>(aff.intercept));
    f.slope *= aff.slope;
    f.exponent += Probability::kScaleBits;
  }
  return f;
}

std::uint64_t bit_length(const BigInt& v) {
  return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

/// Shortest k >= ceil(-log2 width) such that some m / 2^k lies strictly
/// inside (low, low + width); the smallest such m wins.
Bits dyadic_inside(const BigInt& low, const BigInt& width, unsigned long exponent) {
  const std::uint64_t min_len = exponent - (bit_length(width) - 1);
  const BigInt high = low + width;
  for (std::uint64_t k = min_len;; ++k) {
    BigInt m, probe;
    if (k <= exponent) {
      m = low >> static_cast<mp_bitcnt_t>(exponent - k);
      m += 1;
      probe = m << static_cast<mp_bitcnt_t>(exponent - k);
      if (probe >= high) continue;
    } else {
      m = low << static_cast<mp_bitcnt_t>(k - exponent);
      m += 1;
      probe = high << static_cast<mp_bitcnt_t>(k - exponent);
      if (m >= probe) continue;
    }
    Bits out(k, 0);
    for (std::uint64_t i = 0; i < k; ++i) {
      out[k - 1 - i] = static_cast<std::uint8_t>(mpz_tstbit(m.get_mpz_t(), i));
    }
    return out;
  }
}

}  // namespace

ExactInterval exact_interval(std::span<const std::uint8_t> bits, Probability p,
                             const EncryptionKey& key) {
  const ExactComposition f = compose(bits, p, key);
  BigInt denom = 1;
  denom <<= f.exponent;
  ExactInterval r;
  r.descending = f.slope < 0;
  const BigInt low = r.descending ? BigInt(f.intercept + f.slope) : f.intercept;
  r.low = Rational(low, denom);
  r.width = Rational(BigInt(abs(f.slope)), denom);
  r.low.canonicalize();
  r.width.canonicalize();
  return r;
}

Codeword encode_exact(std::span<const std::uint8_t> bits, Probability p, const EncryptionKey& key) {
  check_encode_key(key, bits.size());
  Codeword cw;
  if (!bits.empty()) {
    const ExactComposition f = compose(bits, p, key);
    const BigInt width = abs(f.slope);
    const BigInt low = f.slope < 0 ? BigInt(f.intercept + f.slope) : f.intercept;
    cw.payload = dyadic_inside(low, width, f.exponent);
  }
  cw.header = make_header(p, key, bits.size(), cw.payload.size());
  return cw;
}

Bits decode_exact(const Codeword& cw, const EncryptionKey& key) {
  check_decode_key(cw, key);
  if (cw.payload.size() != cw.header.payload_len_bits) {
    fail(ErrorKind::Format, "payload length disagrees with header");
  }
  const Probability p = cw.probability();
  const DyadicTable table = dyadic_table(p);

  // The orbit point x_t is kept as the exact ratio num / den. Applying the
  // forward branch for symbol b is x -> (x - B/2^16) / (S/2^16), i.e.
  // num' = 2^16 num - B den, den' = S den.
  BigInt num = 0;
  for (auto b : cw.payload) {
    num <<= 1;
    num += b;
  }
  BigInt den = 1;
  den <<= static_cast<mp_bitcnt_t>(cw.payload.size());

  Bits out;
  out.reserve(cw.header.n_bits);
  BigInt lhs, rhs;
  for (std::uint64_t t = 0; t < cw.header.n_bits; ++t) {
    const std::size_t mi = key.mode_at(t).index();
    // den is nonzero; its sign flips with every negative slope.
    const int den_sign = sgn(den);
    if (sgn(num) * den_sign < 0 || mpz_cmpabs(num.get_mpz_t(), den.get_mpz_t()) > 0) {
      fail(ErrorKind::Decode, "orbit left [0,1] at position " + std::to_string(t));
    }
    // x <= k  <=>  num * 2^16 <= k * den, with the inequality flipped when den < 0
    lhs = num << Probability::kScaleBits;
    rhs = den * table.threshold[mi];
    const int c = cmp(lhs, rhs) * den_sign;
    const int lower = table.lower_bit[mi];
    const int bit = c <= 0 ? lower : 1 - lower;
    out.push_back(static_cast<std::uint8_t>(bit));

    const auto& aff = table.affine[mi][bit];
    num <<= Probability::kScaleBits;
    mpz_submul_ui(num.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(aff.intercept));
    den *= aff.slope;
  }
  return out;
}

LengthBound code_length_bound(std::span<const std::uint8_t> bits, Probability p) {
  check_bits(bits);
  const auto ones = static_cast<unsigned long>(std::count(bits.begin(), bits.end(), 1));
  const auto zeros = static_cast<unsigned long>(bits.size()) - ones;
  BigInt a, b;
  mpz_ui_pow_ui(a.get_mpz_t(), p.width_num(0), zeros);
  mpz_ui_pow_ui(b.get_mpz_t(), p.width_num(1), ones);
  const BigInt width = a * b;
  const std::uint64_t exponent = Probability::kScaleBits * bits.size();
  const std::uint64_t lower = exponent - (bit_length(width) - 1);
  return {lower, lower + 1};
}

// ---------------------------------------------------------------------------
// Stream coder

namespace {

void check_precision(int precision) {
  if (precision < kMinPrecision || precision > kMaxPrecision) {
    fail(ErrorKind::Config, "precision must be in [16, 62], got " + std::to_string(precision));
  }
}

/// Both symbol widths are rounded down so neither exceeds its exact share.
std::array<std::uint64_t, 2> split_widths(std::uint64_t range, Probability p) {
  using u128 = unsigned __int128;
  std::array<std::uint64_t, 2> w{};
  for (int b = 0; b < 2; ++b) {
    w[b] = static_cast<std::uint64_t>((static_cast<u128>(range) * p.width_num(b)) >>
                                      Probability::kScaleBits);
    w[b] = std::max<std::uint64_t>(w[b], 1);
  }
  return w;
}

/// '0' occupies the bottom of the current register interval.
bool zero_at_bottom(MapMode mode, bool flipped) {
  return mode_layout(mode).zero_on_top == flipped;
}

}  // namespace

StreamEncoder::StreamEncoder(Probability p, int precision) : p_(p), precision_(precision) {
  check_precision(precision);
  half_ = std::uint64_t{1} << (precision - 1);
  quarter_ = std::uint64_t{1} << (precision - 2);
  low_ = 0;
  high_ = (std::uint64_t{1} << precision) - 1;
}

void StreamEncoder::emit(int bit) {
  out_.push_back(static_cast<std::uint8_t>(bit));
  for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(1 - bit));
}

void StreamEncoder::encode(int bit, MapMode mode) {
  const auto w = split_widths(high_ - low_ + 1, p_);
  const bool bottom = zero_at_bottom(mode, flipped_) == (bit == 0);
  if (bottom) {
    high_ = low_ + w[bit] - 1;
  } else {
    low_ = high_ - w[bit] + 1;
  }
  flipped_ ^= mode_layout(mode).negative[bit];

  for (;;) {
    if (high_ < half_) {
      emit(0);
    } else if (low_ >= half_) {
      emit(1);
      low_ -= half_;
      high_ -= half_;
    } else if (low_ >= quarter_ && high_ < half_ + quarter_) {
      ++pending_;
      low_ -= quarter_;
      high_ -= quarter_;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
  }
}

Bits StreamEncoder::finish() {
  // Smallest k with 2^(P-k) <= range keeps the output at or above the
  // information content; then take the first k-bit value strictly inside.
  const std::uint64_t range = high_ - low_ + 1;
  int k = 1;
  while ((std::uint64_t{1} << (precision_ - k)) > range) ++k;
  for (;; ++k) {
    const int shift = precision_ - k;
    const std::uint64_t v = ((low_ >> shift) + 1) << shift;
    if (v <= high_) {
      emit(static_cast<int>((v >> (precision_ - 1)) & 1));
      for (int i = 1; i < k; ++i) {
        out_.push_back(static_cast<std::uint8_t>((v >> (precision_ - 1 - i)) & 1));
      }
      break;
    }
  }
  return std::move(out_);
}

StreamDecoder::StreamDecoder(Probability p, std::span<const std::uint8_t> payload, int precision)
    : p_(p), precision_(precision), payload_(payload) {
  check_precision(precision);
  half_ = std::uint64_t{1} << (precision - 1);
  quarter_ = std::uint64_t{1} << (precision - 2);
  low_ = 0;
  high_ = (std::uint64_t{1} << precision) - 1;
  for (int i = 0; i < precision; ++i) value_ = (value_ << 1) | static_cast<std::uint64_t>(next_bit());
}

int StreamDecoder::next_bit() {
  return cursor_ < payload_.size() ? payload_[cursor_++] : 0;
}

int StreamDecoder::decode(MapMode mode) {
  const auto w = split_widths(high_ - low_ + 1, p_);
  const bool zero_bottom = zero_at_bottom(mode, flipped_);
  int bit;
  if (zero_bottom) {
    bit = value_ - low_ < w[0] ? 0 : 1;
  } else {
    bit = value_ > high_ - w[0] ? 0 : 1;
  }
  const bool bottom = zero_bottom == (bit == 0);
  if (bottom) {
    high_ = low_ + w[bit] - 1;
  } else {
    low_ = high_ - w[bit] + 1;
  }
  flipped_ ^= mode_layout(mode).negative[bit];

  const std::uint64_t mask = (std::uint64_t{1} << precision_) - 1;
  for (;;) {
    if (high_ < half_) {
      // nothing to subtract
    } else if (low_ >= half_) {
      low_ -= half_;
      high_ -= half_;
      value_ -= half_;
    } else if (low_ >= quarter_ && high_ < half_ + quarter_) {
      low_ -= quarter_;
      high_ -= quarter_;
      value_ -= quarter_;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
    // A wrong key can push the value outside [low, high]; keep it in range.
    value_ = ((value_ << 1) | static_cast<std::uint64_t>(next_bit())) & mask;
  }
  return bit;
}

Codeword encode_stream(std::span<const std::uint8_t> bits, Probability p, const EncryptionKey& key,
                       int precision) {
  check_precision(precision);
  check_encode_key(key, bits.size());
  check_bits(bits);
  Codeword cw;
  if (!bits.empty()) {
    StreamEncoder enc(p, precision);
    for (std::size_t t = 0; t < bits.size(); ++t) enc.encode(bits[t], key.mode_at(t));
    cw.payload = enc.finish();
  }
  cw.header = make_header(p, key, bits.size(), cw.payload.size());
  return cw;
}

Bits decode_stream(const Codeword& cw, const EncryptionKey& key, int precision) {
  check_precision(precision);
  check_decode_key(cw, key);
  if (cw.payload.size() != cw.header.payload_len_bits) {
    fail(ErrorKind::Format, "payload length disagrees with header");
  }
  Bits out;
  out.reserve(cw.header.n_bits);
  StreamDecoder dec(cw.probability(), cw.payload, precision);
  for (std::uint64_t t = 0; t < cw.header.n_bits; ++t) {
    out.push_back(static_cast<std::uint8_t>(dec.decode(key.mode_at(t))));
  }
  return out;
}

}  // namespace bcac
