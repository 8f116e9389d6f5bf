#include <doctest.h>

#include "cupgame/emptiers.hpp"
#include "cupgame/fillers.hpp"
#include "cupgame/metrics.hpp"

#include <set>

using namespace cupgame;

namespace {

GameConfig config(VariantKind k, std::int64_t n, std::int64_t p, BigInt D, Rational delta = 0) {
  GameConfig c;
  c.variant.kind = k;
  c.n = n;
  c.p = p;
  c.epsilon = Rational(1, 4);
  c.delta = delta;
  c.resolution = D;
  return c;
}

// Plays filler vs emptier for `steps` steps, passing each emptier move back.
GameState play(GameConfig cfg, FillerStrategy& f, EmptierStrategy& e, std::int64_t steps, bool show_state = true) {
  GameState s = new_game(cfg);
  e.start(s);
  EmptierMove last;
  for (std::int64_t i = 1; i <= steps; ++i) {
    FillerView view{i, &s.config(), show_state ? &s : nullptr, i > 1 ? &last : nullptr};
    FillerMove m = f.next_move(view);
    REQUIRE_FALSE(validate_filler_move(s, m));
    last = play_step(s, std::move(m), e).emptier;
  }
  return s;
}

// Fill of the last untouched cup: step i pours p/2 evenly over the n - (i-1)p
// cups not yet flushed.
Rational harmonic_construction(std::int64_t n, std::int64_t p) {
  Rational sum(0);
  for (std::int64_t i = 1; i <= n / p - 1; ++i) sum += Rational(p, 2) / Rational(n - (i - 1) * p);
  return sum;
}

}  // namespace

TEST_CASE("equal splits are exact even shares or refused") {
  const std::vector<CupId> cups{0, 2, 5};
  FillerMove m = equal_split_move(cups, WaterAmount(12));
  REQUIRE(m.pours.size() == 3);
  for (const Pour& p : m.pours) CHECK(p.amount.units() == 4);
  CHECK(m.pours[2].cup == 5);
  CHECK_THROWS_AS(equal_split_move(cups, WaterAmount(9)), NonRepresentable);
  CHECK_THROWS_AS(equal_split_move(cups, WaterAmount(10)), NonRepresentable);
  CHECK(even_floor(WaterAmount(7)).units() == 6);
  CHECK(even_floor(WaterAmount(8)).units() == 8);
}

TEST_CASE("compact traces round-trip arbitrary moves") {
  RngStream r(11, "compact");
  std::vector<FillerMove> moves;
  CompactTrace trace;
  for (int i = 0; i < 100; ++i) {
    FillerMove m;
    CupId id = 0;
    const auto k = r.uniform_below(std::uint64_t{12});
    for (std::uint64_t j = 0; j < k; ++j) {
      id += 1 + r.uniform_below(std::uint64_t{3});
      m.pours.push_back({id, WaterAmount(static_cast<std::int64_t>(2 * (1 + r.uniform_below(std::uint64_t{2}))))});
    }
    if (i % 7 == 0) m.new_cups.push_back({id + 10, WaterAmount(2)});
    moves.push_back(m);
    trace.append(m);
  }
  REQUIRE(trace.size() == moves.size());
  for (std::size_t i = 0; i < moves.size(); ++i) CHECK(trace.move(i) == moves[i]);
}

TEST_CASE("adaptive harmonic reaches the construction's fill against greedy") {
  for (auto [n, p] : {std::pair{8, 2}, {16, 1}, {16, 4}, {64, 2}, {30, 3}}) {
    CAPTURE(n);
    CAPTURE(p);
    GameConfig c = config(VariantKind::UniversalEmptying, n, p, 2);
    c.resolution = lcm_of(default_resolution(c), filler_resolution_divisor({"adaptive_harmonic", {}}, c));
    AdaptiveHarmonicFiller f(c, Rational(1), 0, n);
    GreedyEmptier g("greedy_multi", p);
    GameState s = play(c, f, g, n / p - 1);
    const Rational want = harmonic_construction(n, p);
    CHECK(to_water(backlog(s), c.resolution) == want);
    CHECK(universal_lower_bound(n, p) == want);
    // The set is refreshed at the start of a step, so it still holds the
    // cups flushed in the final step.
    CHECK(f.untouched().size() == static_cast<std::size_t>(2 * p));
  }
}

TEST_CASE("adaptive harmonic starts a new round when its set runs out") {
  GameConfig c = config(VariantKind::SingleProcessor, 4, 1, 2);
  c.resolution = lcm_of(default_resolution(c), filler_resolution_divisor({"adaptive_harmonic", {}}, c));
  AdaptiveHarmonicFiller f(c, Rational(1), 0, 4);
  GreedyEmptier g("greedy_single", 1);
  GameState s = play(c, f, g, 9);
  CHECK(f.untouched().size() >= 1);
  CHECK(s.step() == 9);
}

TEST_CASE("adaptive harmonic adds fresh cups in dynamic games") {
  GameConfig c = config(VariantKind::DynamicSingle, 1, 1, 2);
  const StrategySpec spec{"adaptive_harmonic", {{"new_cups", "2"}, {"max_cups", "6"}}};
  c.resolution = lcm_of(default_resolution(c), filler_resolution_divisor(spec, c));
  AdaptiveHarmonicFiller f(c, Rational(1), 2, 6);
  GreedyEmptier g("greedy_single", 1);
  GameState s = play(c, f, g, 20);
  CHECK(s.size() <= 6);
  CHECK(s.next_id() >= 6);
}

TEST_CASE("oblivious guessing pours over its candidates and guesses p of them") {
  GameConfig c = config(VariantKind::UniversalEmptying, 12, 2, 2);
  const StrategySpec spec{"oblivious_guessing", {{"k", "8"}}};
  c.resolution = lcm_of(default_resolution(c), filler_resolution_divisor(spec, c));
  ObliviousGuessingFiller f(c, 8, {3, 1});
  CHECK(f.information_model() == InformationModel::Oblivious);
  std::set<CupId> alive{0, 1, 2, 3, 4, 5, 6, 7};
  for (std::int64_t i = 1; i <= 3; ++i) {
    FillerMove m = f.next_move({i, &c, nullptr, nullptr});
    CHECK(m.pours.size() == alive.size());
    for (const Pour& p : m.pours) CHECK(alive.count(p.cup));
    for (CupId g : f.guesses().back()) alive.erase(g);
  }
  CHECK(alive.size() == 2);
  CHECK(f.next_move({4, &c, nullptr, nullptr}).pours.empty());
  CHECK_THROWS_AS(ObliviousGuessingFiller(c, 7, {}), ConfigError);
}

TEST_CASE("uniform random spends its budget within the rules") {
  GameConfig c = config(VariantKind::RenormalizedMulti, 100, 8, 2, Rational(1, 8));
  c.resolution = default_resolution(c);
  UniformRandomFiller f(c, Rational(1), {7, 0}, 0, 0);
  UniformRandomFiller twin(c, Rational(1), {7, 0}, 0, 0);
  UniformRandomFiller other(c, Rational(1), {7, 1}, 0, 0);
  GameState s = new_game(c);
  const BigInt budget = to_units(pour_budget_water(c), c.resolution).units();
  bool differs = false;
  for (std::int64_t i = 1; i <= 50; ++i) {
    FillerMove m = f.next_move({i, &c, nullptr, nullptr});
    CHECK_FALSE(validate_filler_move(s, m));
    BigInt total = 0;
    for (const Pour& p : m.pours) total += p.amount.units();
    CHECK(total == budget);
    CHECK(twin.next_move({i, &c, nullptr, nullptr}) == m);
    differs = differs || !(other.next_move({i, &c, nullptr, nullptr}) == m);
  }
  CHECK(differs);
}

TEST_CASE("single target and round robin") {
  GameConfig c = config(VariantKind::MultiProcessor, 6, 2, 16, Rational(1, 8));
  SingleTargetFiller st(c, Rational(1), 4);
  FillerMove m = st.next_move({});
  REQUIRE(m.pours.size() == 1);
  CHECK(m.pours[0].cup == 4);
  CHECK(m.pours[0].amount.units() == 14);  // the 1 - delta cap, below the budget of 24
  CHECK_THROWS_AS(SingleTargetFiller(c, Rational(1), 6), ConfigError);

  RoundRobinFiller rr(c, Rational(1), 3);
  FillerMove a = rr.next_move({}), b = rr.next_move({});
  REQUIRE(a.pours.size() == 2);
  CHECK(a.pours[0].cup == 0);
  CHECK(a.pours[1].cup == 1);
  CHECK(a.pours[0].amount.units() == 14);
  CHECK(a.pours[1].amount.units() == 10);
  CHECK(b.pours[0].cup == 0);
  CHECK(b.pours[1].cup == 2);
}

TEST_CASE("resolution divisors cover every equal share") {
  GameConfig c = config(VariantKind::UniversalEmptying, 8, 2, 2);
  // Shares 1/4, 1/6, 1/8 must be even unit counts: D divisible by 8, 12 and 16.
  CHECK(filler_resolution_divisor({"adaptive_harmonic", {}}, c) == 48);
  CHECK(filler_resolution_divisor({"uniform_random", {}}, c) == 2);
}

TEST_CASE("offline simulation refuses randomized targets") {
  GameConfig c = config(VariantKind::UniversalEmptying, 8, 2, 2);
  c.resolution = lcm_of(default_resolution(c), BigInt(48));
  CHECK_THROWS_AS(simulate_adaptive_trace(c, {"smoothed_greedy", {}}), SetupError);
  auto trace = simulate_adaptive_trace(c, {"greedy_multi", {}});
  CHECK(trace->size() == 3);
  CHECK(trace->move(0).pours.size() == 8);
  CHECK(trace->move(2).pours.size() == 4);
}

TEST_CASE("filler factory checks names and information models") {
  GameConfig c = config(VariantKind::SingleProcessor, 4, 1, 8);
  try {
    FillerFactory bad({"nope", {}}, c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("uniform_random") != std::string::npos);
  }
  CHECK(FillerFactory({"uniform_random", {}}, c).information_model() == InformationModel::Oblivious);
  CHECK(FillerFactory({"adaptive_harmonic", {}}, c).information_model() == InformationModel::Adaptive);
  GameConfig dyn = config(VariantKind::DynamicSingle, 4, 1, 8);
  CHECK(filler_is_adaptive({"uniform_random", {}}, dyn));
  CHECK_THROWS_AS(FillerFactory({"round_robin", {}}, dyn), ConfigError);
}
