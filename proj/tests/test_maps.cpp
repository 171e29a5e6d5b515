#include <doctest.h>

#include <set>
#include <tuple>

#include "bcac/error.hpp"
#include "bcac/maps.hpp"

using namespace bcac;

namespace {

Rational q(long n, long d) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

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

const std::vector<Rational> kGrid = {q(1, 4), q(1, 2), q(3, 4), q(3, 10), q(1, 65536),
                                     q(65535, 65536), q(7, 13)};

}  // namespace

TEST_CASE("keyspace counts") {
  CHECK(keyspace_size(2) == 8);
  CHECK(keyspace_size(3) == 48);
  CHECK(keyspace_size(4) == 384);
  CHECK(key_bits(2) == 3);
  CHECK(key_bits(3) == 6);
  CHECK(key_bits(4) == 9);
  CHECK(kind_of([] { keyspace_size(1); }) == ErrorKind::InvalidAlphabet);
  CHECK(kind_of([] { key_bits(0); }) == ErrorKind::InvalidAlphabet);
}

TEST_CASE("symbol model validation") {
  CHECK(kind_of([] { SymbolModel({q(1, 2)}); }) == ErrorKind::InvalidAlphabet);
  CHECK(kind_of([] { SymbolModel({q(1, 2), q(1, 3)}); }) == ErrorKind::Model);
  CHECK(kind_of([] { SymbolModel({Rational(0), Rational(1)}); }) == ErrorKind::Model);
  CHECK(SymbolModel::binary(q(3, 10)).prob(1) == q(7, 10));
}

TEST_CASE("build_nary_map layouts") {
  SUBCASE("symmetric halves") {
    auto pieces = build_nary_map(
        {SymbolModel({q(1, 2), q(1, 2)}), {0, 1}, {Orientation::Positive, Orientation::Positive}});
    REQUIRE(pieces.size() == 2);
    CHECK(pieces[0].beg == 0);
    CHECK(pieces[0].end == q(1, 2));
    CHECK(pieces[1].end == 1);
    auto out = map_forward(pieces, q(1, 4));
    CHECK(out.symbol == 0);
    CHECK(out.y == q(1, 2));
  }
  SUBCASE("swapped widths follow the symbol") {
    auto pieces = build_nary_map(
        {SymbolModel({q(3, 10), q(7, 10)}), {1, 0}, {Orientation::Positive, Orientation::Positive}});
    CHECK(pieces[0].width() == q(7, 10));
    CHECK(pieces[1].width() == q(3, 10));
    CHECK(pieces[0].symbol == 1);
  }
  SUBCASE("negative half reflects about its midpoint") {
    auto pieces = build_nary_map(
        {SymbolModel({q(1, 2), q(1, 2)}), {0, 1}, {Orientation::Negative, Orientation::Positive}});
    CHECK(map_forward(pieces, q(1, 4)).y == q(1, 2));
    CHECK(map_forward(pieces, q(1, 8)).y == q(3, 4));
  }
  SUBCASE("four symbols, mixed orientations") {
    const SymbolModel model({q(1, 10), q(2, 10), q(3, 10), q(4, 10)});
    auto pieces = build_nary_map({model,
                                  {2, 0, 3, 1},
                                  {Orientation::Positive, Orientation::Negative,
                                   Orientation::Negative, Orientation::Positive}});
    REQUIRE(pieces.size() == 4);
    Rational cursor = 0;
    for (const auto& piece : pieces) {
      CHECK(piece.beg == cursor);
      CHECK(piece.beg < piece.end);
      CHECK(piece.width() == model.prob(piece.symbol));
      cursor = piece.end;
    }
    CHECK(cursor == 1);
    // Every probe point on a fine grid lies in exactly one piece.
    for (long j = 0; j < 1000; ++j) {
      const Rational x = q(j, 1000);
      int hits = 0;
      for (const auto& piece : pieces) hits += piece.contains(x) ? 1 : 0;
      CHECK(hits == 1);
    }
    // 0.55 sits in the reflected [0.4, 0.8) piece of symbol 3: 1 - 0.15/0.4.
    auto out = map_forward(pieces, q(55, 100));
    CHECK(out.symbol == 3);
    CHECK(out.y == q(5, 8));
  }
  SUBCASE("bad inputs") {
    const SymbolModel model({q(1, 2), q(1, 2)});
    CHECK(kind_of([&] { build_nary_map({model, {0, 0}, {Orientation::Positive, Orientation::Positive}}); }) ==
          ErrorKind::Model);
    CHECK(kind_of([&] { build_nary_map({model, {0}, {Orientation::Positive}}); }) == ErrorKind::Model);
    auto pieces = build_nary_map({model, {0, 1}, {Orientation::Positive, Orientation::Positive}});
    CHECK(kind_of([&] { map_forward(pieces, Rational(1)); }) == ErrorKind::Domain);
    CHECK(kind_of([&] { map_forward(pieces, q(-1, 3)); }) == ErrorKind::Domain);
  }
}

TEST_CASE("parameter columns") {
  const auto a = bcac_params(MapMode(1), q(3, 10));
  CHECK(a.m1 == q(3, 10));
  CHECK(a.b1 == 0);
  CHECK(a.m2 == q(7, 10));
  CHECK(a.b2 == q(3, 10));
  CHECK(a.n1 == q(10, 3));
  CHECK(a.c1 == 0);
  CHECK(a.n2 == q(10, 7));
  CHECK(a.c2 == q(-3, 7));
  CHECK(std::tie(a.i1, a.i2, a.i3, a.i4) == std::make_tuple(Rational(0), q(3, 10), q(3, 10), Rational(1)));
  CHECK(a.k == q(3, 10));

  const auto e = bcac_params(MapMode(5), q(3, 10));
  CHECK(e.m1 == q(3, 10));
  CHECK(e.b1 == q(7, 10));
  CHECK(e.m2 == q(7, 10));
  CHECK(e.b2 == 0);
  CHECK(e.n1 == q(10, 7));
  CHECK(e.c1 == 0);
  CHECK(e.n2 == q(10, 3));
  CHECK(e.c2 == q(-7, 3));
  CHECK(std::tie(e.i1, e.i2, e.i3, e.i4) == std::make_tuple(q(7, 10), Rational(1), Rational(0), q(7, 10)));
  CHECK(e.k == q(7, 10));

  const auto c = bcac_params(MapMode(3), q(1, 2));
  CHECK(c.m1 == q(-1, 2));
  CHECK(c.b1 == q(1, 2));

  CHECK(kind_of([] { bcac_params(MapMode(1), Rational(0)); }) == ErrorKind::Model);
  CHECK(kind_of([] { bcac_params(MapMode(1), Rational(1)); }) == ErrorKind::Model);
  CHECK(kind_of([] { MapMode(0); }) == ErrorKind::Key);
  CHECK(kind_of([] { MapMode(9); }) == ErrorKind::Key);
}

TEST_CASE("widths, images and inverse law") {
  for (const auto& p : kGrid) {
    for (int d = 1; d <= 8; ++d) {
      CAPTURE(d);
      const auto prm = bcac_params(MapMode(d), p);
      CHECK(abs(prm.m1) == p);
      CHECK(prm.i2 - prm.i1 == p);
      CHECK(abs(prm.m2) == 1 - p);
      CHECK(prm.i4 - prm.i3 == 1 - p);
      for (int bit = 0; bit <= 1; ++bit) {
        auto [m, b] = prm.decode_affine(bit);
        Rational lo = b, hi = m + b;
        if (lo > hi) std::swap(lo, hi);
        CHECK(lo == (bit == 0 ? prm.i1 : prm.i3));
        CHECK(hi == (bit == 0 ? prm.i2 : prm.i4));
        for (long j = 1; j <= 200; ++j) {
          const Rational y = q(j, 201);
          CHECK(prm.forward(m * y + b) == y);
        }
      }
    }
  }
}

TEST_CASE("layout flags agree with the parameter signs") {
  for (int d = 1; d <= 8; ++d) {
    const auto prm = bcac_params(MapMode(d), q(1, 3));
    const auto& lay = mode_layout(MapMode(d));
    CHECK(lay.zero_on_top == (prm.i1 > prm.i3));
    CHECK(lay.negative[0] == (prm.m1 < 0));
    CHECK(lay.negative[1] == (prm.m2 < 0));
  }
}

TEST_CASE("twin modes") {
  CHECK(twin_mode(MapMode(1), 0) == MapMode(2));
  CHECK(twin_mode(MapMode(3), 0) == MapMode(4));
  CHECK(twin_mode(MapMode(6), 1) == MapMode(5));

  // Brute-force scan of the parameter table.
  for (const auto& p : kGrid) {
    for (int d = 1; d <= 8; ++d) {
      for (int bit = 0; bit <= 1; ++bit) {
        const auto self = bcac_params(MapMode(d), p);
        std::vector<int> same;
        for (int o = 1; o <= 8; ++o) {
          if (o == d) continue;
          const auto other = bcac_params(MapMode(o), p);
          const bool eq = bit == 0 ? std::tie(self.m1, self.b1, self.i1, self.i2) ==
                                         std::tie(other.m1, other.b1, other.i1, other.i2)
                                   : std::tie(self.m2, self.b2, self.i3, self.i4) ==
                                         std::tie(other.m2, other.b2, other.i3, other.i4);
          if (eq) same.push_back(o);
        }
        REQUIRE(same.size() == 1);
        CHECK(twin_mode(MapMode(d), bit).digit() == same[0]);
        CHECK(twin_mode(twin_mode(MapMode(d), bit), bit) == MapMode(d));
        CHECK(twin_mode(MapMode(d), bit) != MapMode(d));
      }
    }
  }
}

TEST_CASE("the eight modes are the eight two-piece arrangements") {
  const Rational p = q(3, 10);
  using Affine = std::pair<Rational, Rational>;
  auto affine_of = [](const LinearPiece& piece) -> Affine {
    if (piece.orientation == Orientation::Positive) return {piece.width(), piece.beg};
    return {-piece.width(), piece.end};
  };
  std::set<std::pair<Affine, Affine>> from_arrangements;
  const auto model = SymbolModel::binary(p);
  for (const std::vector<std::size_t>& perm : {std::vector<std::size_t>{0, 1}, {1, 0}}) {
    for (int o = 0; o < 4; ++o) {
      std::vector<Orientation> orient = {(o & 1) ? Orientation::Negative : Orientation::Positive,
                                         (o & 2) ? Orientation::Negative : Orientation::Positive};
      auto pieces = build_nary_map({model, perm, orient});
      Affine zero, one;
      for (const auto& piece : pieces) (piece.symbol == 0 ? zero : one) = affine_of(piece);
      from_arrangements.insert({zero, one});
    }
  }
  std::set<std::pair<Affine, Affine>> from_table;
  for (int d = 1; d <= 8; ++d) {
    const auto prm = bcac_params(MapMode(d), p);
    from_table.insert({prm.decode_affine(0), prm.decode_affine(1)});
  }
  CHECK(from_arrangements.size() == 8);
  CHECK(from_table == from_arrangements);
  CHECK(keyspace_size(2) == static_cast<long>(from_table.size()));
}
