#include <doctest.h>

#include "cupgame/core.hpp"
#include "cupgame/rng.hpp"

#include <cmath>

using namespace cupgame;

TEST_CASE("rationals parse from fractions, integers and decimals") {
  CHECK(parse_rational("1/4") == Rational(1, 4));
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("0.3") == Rational(3, 10));
  CHECK(parse_rational("-2/6") == Rational(-1, 3));
  CHECK(format_rational(Rational(6, 8)) == "3/4");
  CHECK(format_rational(Rational(5)) == "5");
  CHECK_THROWS_AS(parse_rational("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_rational("abc"), ConfigError);
  CHECK_THROWS_AS(parse_rational(""), ConfigError);
}

TEST_CASE("water never goes negative") {
  WaterAmount a(5), b(7);
  CHECK_THROWS_AS(a - b, NegativeWater);
  CHECK_THROWS_AS(WaterAmount(-1), NegativeWater);
  CHECK((b - a).units() == 2);
  CHECK(WaterAmount(4).is_even());
  CHECK_FALSE(WaterAmount(3).is_even());
}

TEST_CASE("unit conversion is exact and rejects fractions of a unit") {
  const BigInt D = 24;
  CHECK(to_units(Rational(3, 4), D).units() == 18);
  CHECK(to_water(WaterAmount(18), D) == Rational(3, 4));
  CHECK_THROWS_AS(to_units(Rational(1, 5), D), NonRepresentable);
}

TEST_CASE("whole_part matches division for small and huge resolutions") {
  RngStream rng(3, "whole-part");
  for (int bits : {8, 63, 64, 65, 200, 1500}) {
    const BigInt D = (BigInt(1) << bits) - 3;
    for (int k = 0; k < 200; ++k) {
      // Quotients from 0 to about 20, then a few large ones.
      BigInt u = D * (k % 21) + rng.uniform_below(D);
      if (k % 50 == 49) u = D * BigInt(rng.next_u64() >> 2) + rng.uniform_below(D);
      CHECK(BigInt(whole_part(WaterAmount(u), D)) == u / D);
    }
  }
}

TEST_CASE("to_double of units agrees with the rational value") {
  RngStream rng(4, "to-double");
  for (int bits : {10, 64, 300, 6000}) {
    const BigInt D = (BigInt(1) << bits) + 1;
    for (int k = 0; k < 50; ++k) {
      const BigInt u = rng.uniform_below(BigInt(D * 40));
      const double want = to_double(Rational(u, D));
      const double got = to_double(WaterAmount(u), D);
      CHECK(std::abs(got - want) <= 1e-14 * std::max(1.0, std::abs(want)));
    }
  }
  CHECK(to_double(WaterAmount(0), BigInt(7)) == 0.0);
}

TEST_CASE("variant names round-trip") {
  for (auto k : {VariantKind::SingleProcessor, VariantKind::MultiProcessor, VariantKind::RenormalizedMulti,
                 VariantKind::DynamicSingle, VariantKind::DynamicMulti, VariantKind::CupFlushing,
                 VariantKind::UniversalEmptying})
    CHECK(parse_variant(variant_name(k)) == k);
  CHECK_THROWS_AS(parse_variant("triple"), ConfigError);
}

TEST_CASE("config validation names the offending field") {
  GameConfig c;
  c.variant.kind = VariantKind::RenormalizedMulti;
  c.n = 16;
  c.p = 4;
  c.epsilon = Rational(1, 4);
  c.delta = Rational(1, 3);
  c.resolution = 8;
  const auto errs = validate_config(c, {.threshold_emptier = true});
  REQUIRE_FALSE(errs.empty());
  bool names_delta = false;
  for (const auto& e : errs) names_delta = names_delta || e.find("denominator of delta") != std::string::npos;
  CHECK(names_delta);

  c.delta = Rational(1, 4);
  c.resolution = default_resolution(c);
  CHECK(validate_config(c, {.threshold_emptier = true}).empty());

  GameConfig bad;
  bad.n = 0;
  CHECK_FALSE(validate_config(bad).empty());
}

TEST_CASE("default resolution is even and divisible by the inputs") {
  GameConfig c;
  c.variant.kind = VariantKind::MultiProcessor;
  c.n = 6;
  c.p = 3;
  c.epsilon = Rational(1, 5);
  c.delta = Rational(1, 7);
  const BigInt D = default_resolution(c);
  CHECK(D % 2 == 0);
  CHECK(D % 5 == 0);
  CHECK(D % 7 == 0);
  CHECK(D % 36 == 0);
  CHECK(D % 3 == 0);
}
