#include "bcac/maps.hpp"

#include <algorithm>
#include <numeric>

#include "bcac/error.hpp"

namespace bcac {

namespace {

void require_alphabet(long n) {
  if (n < 2) {
    fail(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2, got " + std::to_string(n));
  }
}

void require_open_unit(const Rational& p) {
  if (p <= 0 || p >= 1) {
    fail(ErrorKind::Model, "probability must lie strictly inside (0,1), got " + p.get_str());
  }
}

}  // namespace

SymbolModel::SymbolModel(std::vector<Rational> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    fail(ErrorKind::InvalidAlphabet, "a symbol model needs at least two symbols");
  }
  Rational total = 0;
  for (auto& p : probs_) {
    p.canonicalize();
    require_open_unit(p);
    total += p;
  }
  if (total != 1) {
    fail(ErrorKind::Model, "symbol probabilities sum to " + total.get_str() + ", not 1");
  }
}

SymbolModel SymbolModel::binary(const Rational& p) {
  return SymbolModel({p, Rational(1 - p)});
}

BigInt keyspace_size(long alphabet_size) {
  require_alphabet(alphabet_size);
  BigInt factorial;
  mpz_fac_ui(factorial.get_mpz_t(), static_cast<unsigned long>(alphabet_size));
  BigInt orientations;
  mpz_ui_pow_ui(orientations.get_mpz_t(), 2, static_cast<unsigned long>(alphabet_size));
  return factorial * orientations;
}

long key_bits(long alphabet_size) {
  BigInt count = keyspace_size(alphabet_size);
  // ceil(log2 x) == bit length of (x - 1) for x >= 2
  BigInt below = count - 1;
  return static_cast<long>(mpz_sizeinbase(below.get_mpz_t(), 2));
}

std::vector<LinearPiece> build_nary_map(const NaryMapSpec& spec) {
  const std::size_t n = spec.model.size();
  if (spec.permutation.size() != n || spec.orientations.size() != n) {
    fail(ErrorKind::Model, "permutation and orientation lists must match the alphabet size");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t s : spec.permutation) {
    if (s >= n || seen[s]) {
      fail(ErrorKind::Model, "slot permutation is not a bijection");
    }
    seen[s] = true;
  }

  std::vector<LinearPiece> pieces;
  pieces.reserve(n);
  Rational cursor = 0;
  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t symbol = spec.permutation[slot];
    LinearPiece piece;
    piece.beg = cursor;
    cursor += spec.model.prob(symbol);
    piece.end = cursor;
    piece.orientation = spec.orientations[slot];
    piece.symbol = symbol;
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

MapOutput map_forward(const std::vector<LinearPiece>& pieces, const Rational& x) {
  if (x < 0 || x >= 1) {
    fail(ErrorKind::Domain, "map input must lie in [0,1), got " + x.get_str());
  }
  auto it = std::find_if(pieces.begin(), pieces.end(),
                         [&](const LinearPiece& piece) { return piece.contains(x); });
  if (it == pieces.end()) {
    fail(ErrorKind::Model, "pieces do not cover " + x.get_str());
  }
  Rational t = (x - it->beg) / it->width();
  if (it->orientation == Orientation::Negative) {
    t = 1 - t;
  }
  return {it->symbol, t};
}

MapMode::MapMode(int digit) : digit_(digit) {
  if (digit < 1 || digit > kCount) {
    fail(ErrorKind::Key, "map mode digit must be in 1..8, got " + std::to_string(digit));
  }
}

BcacParams bcac_params(MapMode mode, const Rational& p) {
  require_open_unit(p);
  const Rational q = 1 - p;
  const Rational inv_p = 1 / p;
  const Rational inv_q = 1 / q;

  BcacParams r;
  // Column order (a)..(h) maps onto digits 1..8.
  switch (mode.digit()) {
    case 1:
      r = {p, 0, q, p, inv_p, 0, inv_q, -p / q, 0, p, p, 1, p};
      break;
    case 2:
      r = {p, 0, -q, 1, inv_p, 0, -inv_q, inv_q, 0, p, p, 1, p};
      break;
    case 3:
      r = {-p, p, -q, 1, -inv_p, 1, -inv_q, inv_q, 0, p, p, 1, p};
      break;
    case 4:
      r = {-p, p, q, p, -inv_p, 1, inv_q, -p / q, 0, p, p, 1, p};
      break;
    case 5:
      r = {p, q, q, 0, inv_q, 0, inv_p, -q / p, q, 1, 0, q, q};
      break;
    case 6:
      r = {-p, 1, q, 0, inv_q, 0, -inv_p, inv_p, q, 1, 0, q, q};
      break;
    case 7:
      r = {-p, 1, -q, q, -inv_q, 1, -inv_p, inv_p, q, 1, 0, q, q};
      break;
    case 8:
      r = {p, q, -q, q, -inv_q, 1, inv_p, -q / p, q, 1, 0, q, q};
      break;
    default:
      fail(ErrorKind::Key, "invalid mode");
  }
  for (Rational* v : {&r.m1, &r.b1, &r.m2, &r.b2, &r.n1, &r.c1, &r.n2, &r.c2, &r.i1, &r.i2,
                      &r.i3, &r.i4, &r.k}) {
    v->canonicalize();
  }
  return r;
}

namespace {

// Pairs of modes sharing the decode affine for '0' and for '1'.
constexpr std::array<int, 8> kTwinZero = {2, 1, 4, 3, 8, 7, 6, 5};
constexpr std::array<int, 8> kTwinOne = {4, 3, 2, 1, 6, 5, 8, 7};

constexpr std::array<ModeLayout, 8> kLayouts = {{
    {false, {false, false}},
    {false, {false, true}},
    {false, {true, true}},
    {false, {true, false}},
    {true, {false, false}},
    {true, {true, false}},
    {true, {true, true}},
    {true, {false, true}},
}};

}  // namespace

MapMode twin_mode(MapMode mode, int bit) {
  const auto& table = bit == 0 ? kTwinZero : kTwinOne;
  return MapMode(table[mode.index()]);
}

const ModeLayout& mode_layout(MapMode mode) { return kLayouts[mode.index()]; }

}  // namespace bcac
