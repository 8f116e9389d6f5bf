#include <doctest.h>

#include "cupgame/emptiers.hpp"
#include "cupgame/rng.hpp"

#include <functional>
#include <map>

using namespace cupgame;

namespace {

GameConfig config(VariantKind k, std::int64_t n, std::int64_t p, Rational delta, BigInt D) {
  GameConfig c;
  c.variant.kind = k;
  c.n = n;
  c.p = p;
  c.epsilon = Rational(1, 4);
  c.delta = delta;
  c.resolution = D;
  return c;
}

InitialFills fills(std::initializer_list<std::int64_t> units) {
  InitialFills out;
  CupId id = 0;
  for (auto u : units) {
    if (u) out[id] = WaterAmount(u);
    ++id;
  }
  return out;
}

// Thresholds straight from the definition: block c starts at t0 = 1 + c P and
// holds t0 + m + s for m = 1..1/delta.
std::vector<BigInt> thresholds_by_definition(const BigInt& D, std::int64_t inv_delta, std::int64_t blocks,
                                             const std::function<BigInt(std::int64_t t0)>& s) {
  std::vector<BigInt> out;
  const std::int64_t P = inv_delta + 1;
  for (std::int64_t c = 0; c < blocks; ++c) {
    const std::int64_t t0 = 1 + c * P;
    for (std::int64_t m = 1; m <= inv_delta; ++m) out.push_back(D * (t0 + m) + s(t0));
  }
  return out;
}

}  // namespace

TEST_CASE("greedy takes the fullest cups, lowest id on ties") {
  GameState s = new_game(config(VariantKind::MultiProcessor, 5, 2, Rational(1, 8), 16), fills({4, 20, 4, 20, 10}));
  EmptierMove m = greedy_multi_move(s, 2);
  REQUIRE(m.removals.size() == 2);
  CHECK(m.removals[0].cup == 1);
  CHECK(m.removals[1].cup == 3);
  CHECK(m.removals[0].amount.units() == 16);  // capped at one unit of water

  EmptierMove one = greedy_single_move(s);
  REQUIRE(one.removals.size() == 1);
  CHECK(one.removals[0].cup == 1);

  GameState ties = new_game(config(VariantKind::MultiProcessor, 4, 3, Rational(1, 8), 16), fills({6, 6, 6, 6}));
  EmptierMove t = greedy_multi_move(ties, 3);
  REQUIRE(t.removals.size() == 3);
  CHECK(t.removals[2].cup == 2);
  CHECK(t.removals[0].amount.units() == 6);  // min(1, fill)
}

TEST_CASE("greedy skips empty cups") {
  GameState s = new_game(config(VariantKind::MultiProcessor, 4, 3, Rational(1, 8), 16), fills({0, 2, 0, 0}));
  CHECK(greedy_multi_move(s, 3).removals.size() == 1);
  GameState e = new_game(config(VariantKind::MultiProcessor, 4, 3, Rational(1, 8), 16));
  CHECK(greedy_multi_move(e, 3).removals.empty());
}

TEST_CASE("smoothed greedy acts only when a virtual fill reaches one") {
  const BigInt D = 10;
  std::vector<WaterAmount> v{WaterAmount(9), WaterAmount(3)};
  CHECK_FALSE(smoothed_greedy_choice(v, D));
  v[1] = WaterAmount(10);
  CHECK(smoothed_greedy_choice(v, D) == 1u);
  v[0] = WaterAmount(14);
  CHECK(smoothed_greedy_choice(v, D) == 0u);
}

TEST_CASE("smoothed greedy removes min(1, fill) and keeps virtual fills consistent") {
  GameConfig c = config(VariantKind::SingleProcessor, 3, 1, Rational(0), 8);
  GameState s = new_game(c);
  SmoothedGreedyEmptier e({5, 0});
  e.start(s);
  std::vector<WaterAmount> r(e.offsets().begin(), e.offsets().end());
  for (const auto& x : r) {
    CHECK_FALSE(x.is_even());
    CHECK(x.units() < 8);
  }
  std::vector<BigInt> poured(3, 0);
  BigInt removed_total = 0;
  for (int i = 0; i < 40; ++i) {
    FillerMove m;
    m.pours.push_back({static_cast<CupId>(i % 3), WaterAmount(6)});
    poured[static_cast<std::size_t>(i % 3)] += 6;
    const StepRecord rec = play_step(s, m, e);
    for (const auto& rm : rec.emptier.removals) {
      CHECK(rm.amount.units() <= 8);
      removed_total += rm.amount.units();
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const BigInt v = e.virtual_fills()[j].units();
      CHECK((v - r[j].units() - poured[j]) % 8 == 0);  // offset plus pours, mod one
      CHECK(v >= s.cups()[j].fill.units());
      CHECK(v < s.cups()[j].fill.units() + 8);
    }
  }
  BigInt left = 0;
  for (const Cup& cup : s.cups()) left += cup.fill.units();
  CHECK(left + removed_total == 240);
}

TEST_CASE("flush greedy empties the fullest cup or the first within slack") {
  GameState s = new_game(config(VariantKind::CupFlushing, 4, 1, Rational(0), 8), fills({10, 14, 0, 16}));
  EmptierMove strict = flush_greedy_move(s, WaterAmount(0));
  REQUIRE(strict.removals.size() == 1);
  CHECK(strict.removals[0].cup == 3);
  CHECK(strict.removals[0].amount.units() == 16);
  EmptierMove relaxed = flush_greedy_move(s, WaterAmount(2));
  CHECK(relaxed.removals[0].cup == 1);
  CHECK(relaxed.removals[0].amount.units() == 14);
}

TEST_CASE("threshold counts match the definition") {
  const BigInt D = 20;
  const std::int64_t inv = 4;
  RngStream draw(1, "test-offsets");
  std::map<std::int64_t, BigInt> offsets;  // by t0
  auto s = [&](std::int64_t t0) -> BigInt {
    auto it = offsets.find(t0);
    if (it == offsets.end()) it = offsets.emplace(t0, uniform_threshold(draw, D).units()).first;
    return it->second;
  };
  const auto all = thresholds_by_definition(D, inv, 30, s);
  ThresholdState st(1, D, Rational(1, inv), [&](std::size_t, std::int64_t t0) { return WaterAmount(s(t0)); });
  RngStream pours(2, "test-pours");
  BigInt cum = 0;
  std::int64_t crossed = 0;
  while (cum < D * 100) {
    const BigInt c = 2 * (1 + pours.uniform_below(std::uint64_t{25}));
    std::int64_t want = 0;
    for (const BigInt& t : all)
      if (t > cum && t <= cum + c) ++want;
    CHECK(st.count_in(0, WaterAmount(cum), WaterAmount(BigInt(cum + c))) == want);
    CHECK(st.record_pour(0, WaterAmount(c)) == want);
    cum += c;
    crossed += want;
    CHECK(st.crossings(0) == crossed);
    CHECK(st.counter(0).units() == crossed * 25);  // (1 + 1/4) * 20 per crossing
  }
  CHECK(st.counter_sum() == st.counter(0));
  // No threshold in the gap between blocks: t = 1 + c P carries none.
  for (const BigInt& t : all) CHECK((t / D - 1) % (inv + 1) != 0);
}

TEST_CASE("offsets must be odd and inside (0, D)") {
  ThresholdState st(1, 20, Rational(1, 4), [](std::size_t, std::int64_t) { return WaterAmount(4); });
  CHECK_THROWS_AS(st.record_pour(0, WaterAmount(60)), SetupError);
  CHECK_THROWS_AS(ThresholdState(1, 20, Rational(2, 5), ThresholdState::seeded(0, 0, 20)), ConfigError);
}

TEST_CASE("initial fills seed counters, scaled or literal") {
  const BigInt D = 20;
  auto fixed = [](std::size_t, std::int64_t) { return WaterAmount(1); };
  // Thresholds at 41, 61, 81, 101 then 141, ...; a fill of 90 passed three.
  ThresholdState scaled(1, D, Rational(1, 4), fixed), literal(1, D, Rational(1, 4), fixed);
  scaled.init_from_initial_fill(0, WaterAmount(90), CounterInit::Scaled);
  literal.init_from_initial_fill(0, WaterAmount(90), CounterInit::Literal);
  CHECK(scaled.crossings(0) == 3);
  CHECK(scaled.counter(0).units() == 75);
  CHECK(literal.counter(0).units() == 60);
  CHECK_THROWS_AS(scaled.init_from_initial_fill(0, WaterAmount(2)), SetupError);
}

TEST_CASE("threshold move serves full counters first, at most p + 1 cups") {
  GameConfig c = config(VariantKind::RenormalizedMulti, 5, 1, Rational(1, 4), 20);
  GameState s = new_game(c, fills({60, 60, 60, 60, 60}));
  ThresholdState st(5, 20, Rational(1, 4), [](std::size_t, std::int64_t) { return WaterAmount(1); });
  // Cup 3 gets two crossings (50 units), cups 0 and 4 one (25), cup 1 none.
  st.record_pour(3, WaterAmount(62));
  st.record_pour(0, WaterAmount(42));
  st.record_pour(4, WaterAmount(42));
  st.decrement(0, WaterAmount(10));  // now below 1 + delta
  std::vector<std::size_t> active{0, 3, 4};
  EmptierMove m = threshold_counter_move(s, st, 1, TieRule::Arbitrary, active);
  REQUIRE(m.removals.size() == 2);
  CHECK(m.removals[0].cup == 3);
  CHECK(m.removals[1].cup == 4);
  CHECK(m.removals[0].amount.units() == 30);  // min(1 + 2 delta, w)
  CHECK(m.removals[1].amount.units() == 25);
  CHECK(st.counter(3).units() == 20);
  CHECK(st.counter(4).is_zero());
  CHECK(st.counter_sum().units() == 35);
}

TEST_CASE("surplus counts crossings beyond p") {
  CHECK(surplus_of_step(3, 4) == 0);
  CHECK(surplus_of_step(7, 4) == 3);
}

TEST_CASE("emptier registry") {
  GameConfig single = config(VariantKind::SingleProcessor, 4, 1, Rational(0), 8);
  CHECK(make_emptier({"greedy_single", {}}, single, {})->name() == "greedy_single");
  CHECK(make_emptier({"smoothed_greedy", {}}, single, {})->randomized());
  CHECK_THROWS_AS(make_emptier({"threshold_counter", {}}, single, {}), ConfigError);
  CHECK_THROWS_AS(make_emptier({"nope", {}}, single, {}), ConfigError);
  CHECK(emptier_uses_thresholds("threshold_counter"));
  CHECK_FALSE(emptier_is_randomized("greedy_multi"));
  for (const auto& n : emptier_names()) CHECK_FALSE(n.empty());
}
