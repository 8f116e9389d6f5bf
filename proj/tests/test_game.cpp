#include <doctest.h>

#include "cupgame/emptiers.hpp"
#include "cupgame/game.hpp"
#include "cupgame/metrics.hpp"

using namespace cupgame;

namespace {

GameConfig config(VariantKind k, std::int64_t n, std::int64_t p, Rational eps, Rational delta, BigInt D) {
  GameConfig c;
  c.variant.kind = k;
  c.n = n;
  c.p = p;
  c.epsilon = eps;
  c.delta = delta;
  c.resolution = D;
  return c;
}

FillerMove pours(std::initializer_list<std::pair<CupId, std::int64_t>> list) {
  FillerMove m;
  for (auto [id, u] : list) m.pours.push_back({id, WaterAmount(u)});
  return m;
}

}  // namespace

TEST_CASE("variant rules in units") {
  const BigInt D = 16;
  auto single = rules_for(config(VariantKind::SingleProcessor, 4, 1, Rational(1, 4), 0, D));
  CHECK(single.pour_budget.units() == 12);
  CHECK_FALSE(single.pour_cap);
  CHECK(single.max_cups_emptied == 1);
  CHECK(single.removal_cap->units() == 16);

  auto multi = rules_for(config(VariantKind::MultiProcessor, 8, 2, Rational(1, 4), Rational(1, 8), D));
  CHECK(multi.pour_budget.units() == 24);
  CHECK(multi.pour_cap->units() == 14);
  CHECK(multi.max_cups_emptied == 2);

  auto renorm = rules_for(config(VariantKind::RenormalizedMulti, 8, 2, Rational(1, 4), Rational(1, 8), D));
  CHECK(renorm.pour_cap->units() == 16);
  CHECK(renorm.max_cups_emptied == 3);
  CHECK(renorm.removal_cap->units() == 20);

  auto flush = rules_for(config(VariantKind::CupFlushing, 4, 1, Rational(1, 4), 0, D));
  CHECK(flush.flush);
  CHECK(flush.pour_budget.units() == 16);

  auto uni = rules_for(config(VariantKind::UniversalEmptying, 8, 2, Rational(1, 4), 0, D));
  CHECK(uni.flush);
  CHECK(uni.pour_budget.units() == 16);
  CHECK(uni.max_cups_emptied == 2);

  CHECK(rules_for(config(VariantKind::DynamicSingle, 4, 1, Rational(1, 4), 0, D)).dynamic);
}

TEST_CASE("filler moves are checked against the rules") {
  GameState s = new_game(config(VariantKind::MultiProcessor, 4, 2, Rational(1, 4), Rational(1, 8), 16));
  CHECK_FALSE(validate_filler_move(s, pours({{0, 14}, {1, 10}})));
  CHECK(validate_filler_move(s, pours({{0, 3}}))->constraint == "even units");
  CHECK(validate_filler_move(s, pours({{0, 16}}))->constraint == "per-cup cap");
  CHECK(validate_filler_move(s, pours({{0, 14}, {1, 14}}))->constraint == "budget");
  CHECK(validate_filler_move(s, pours({{1, 2}, {0, 2}}))->constraint == "distinct cups");
  CHECK(validate_filler_move(s, pours({{9, 2}}))->constraint == "unknown cup");
  CHECK(validate_filler_move(s, pours({{0, 0}}))->constraint == "positive pour");
  FillerMove fresh;
  fresh.new_cups.push_back({4, WaterAmount(2)});
  CHECK(validate_filler_move(s, fresh)->constraint == "new cups");
  CHECK_THROWS_AS(apply_filler_move(s, pours({{0, 3}})), FillerMoveRejected);
}

TEST_CASE("emptier moves are checked against the rules") {
  GameState s = new_game(config(VariantKind::SingleProcessor, 3, 1, Rational(1, 4), 0, 8),
                         {{0, WaterAmount(12)}, {1, WaterAmount(4)}});
  EmptierMove ok{{{0, WaterAmount(8)}}};
  CHECK_FALSE(validate_emptier_move(s, ok));
  EmptierMove two{{{0, WaterAmount(1)}, {1, WaterAmount(1)}}};
  CHECK(validate_emptier_move(s, two)->constraint == "too many cups");
  EmptierMove over{{{1, WaterAmount(6)}}};
  CHECK(validate_emptier_move(s, over)->constraint == "exceeds fill");
  EmptierMove big{{{0, WaterAmount(10)}}};
  CHECK(validate_emptier_move(s, big)->constraint == "per-cup cap");

  GameState f = new_game(config(VariantKind::CupFlushing, 2, 1, Rational(1, 4), 0, 8), {{0, WaterAmount(6)}});
  EmptierMove partial{{{0, WaterAmount(2)}}};
  CHECK(validate_emptier_move(f, partial)->constraint == "must flush entirely");
}

TEST_CASE("a step conserves water and records the backlog") {
  GameState s = new_game(config(VariantKind::SingleProcessor, 3, 1, Rational(1, 4), 0, 8));
  GreedyEmptier greedy("greedy_single", 1);
  StepRecord r = play_step(s, pours({{0, 4}, {2, 2}}), greedy);
  CHECK(r.step == 1);
  CHECK(s.step() == 1);
  // Greedy takes min(1, fill) = all 4 units of cup 0.
  REQUIRE(r.emptier.removals.size() == 1);
  CHECK(r.emptier.removals[0].cup == 0);
  CHECK(s.cups()[0].fill.is_zero());
  CHECK(s.cups()[2].fill.units() == 2);
  CHECK(s.cups()[0].poured.units() == 4);
  CHECK(r.backlog.units() == 2);
  CHECK(r.integer_fill == 0);
}

TEST_CASE("the value form leaves its input untouched") {
  GameState s = new_game(config(VariantKind::SingleProcessor, 2, 1, Rational(1, 4), 0, 8));
  GreedyEmptier greedy("greedy_single", 1);
  auto [next, rec] = step(s, pours({{1, 6}}), greedy);
  CHECK(s.step() == 0);
  CHECK(s.cups()[1].fill.is_zero());
  CHECK(next.step() == 1);
  CHECK(rec.step == 1);
}

TEST_CASE("dynamic games add fresh cups and drop empty ones") {
  GameState s = new_game(config(VariantKind::DynamicSingle, 1, 1, Rational(1, 4), 0, 8));
  CHECK(s.size() == 0);
  GreedyEmptier greedy("greedy_single", 1);
  FillerMove m;
  m.new_cups = {{0, WaterAmount(2)}, {1, WaterAmount(4)}};
  play_step(s, m, greedy);
  // Cup 1 was fullest and emptied, so only cup 0 remains.
  REQUIRE(s.size() == 1);
  CHECK(s.cups()[0].id == 0);
  CHECK(s.next_id() == 2);
  FillerMove reuse;
  reuse.new_cups = {{1, WaterAmount(2)}};
  CHECK(validate_filler_move(s, reuse)->constraint == "fresh cup id");
  CHECK_THROWS_AS(new_game(config(VariantKind::DynamicSingle, 1, 1, Rational(1, 4), 0, 8), {{0, WaterAmount(0)}}),
                  ConfigError);
}

TEST_CASE("an emptier that breaks the rules is a protocol error") {
  struct Cheater final : EmptierStrategy {
    std::string name() const override { return "cheater"; }
    bool randomized() const override { return false; }
    EmptierMove respond(const GameState&, const FillerMove&) override { return {{{0, WaterAmount(100)}}}; }
  } cheater;
  GameState s = new_game(config(VariantKind::SingleProcessor, 2, 1, Rational(1, 4), 0, 8));
  CHECK_THROWS_AS(play_step(s, pours({{0, 2}}), cheater), StrategyProtocolError);
}

TEST_CASE("renormalized parameters map onto a standard game") {
  for (std::int64_t p : {1, 4, 16}) {
    for (Rational delta : {Rational(1, 8), Rational(1, 16)}) {
      const Rational eps(1, 4);
      StandardParameters s = renormalized_to_standard(p, eps, delta);
      // One standard unit holds 1 + 2 delta renormalized units.
      CHECK(s.p == p + 1);
      CHECK(s.unit_scale == 1 + 2 * delta);
      CHECK((1 - s.epsilon) * s.p * s.unit_scale == (1 - eps) * p);  // same pour per step
      CHECK((1 - s.delta) * s.unit_scale == 1);                      // same per-cup pour cap
    }
  }
}

TEST_CASE("backlog of an empty dynamic game is zero") {
  GameState s = new_game(config(VariantKind::DynamicMulti, 1, 2, Rational(1, 4), Rational(1, 8), 16));
  CHECK(backlog(s).is_zero());
}
