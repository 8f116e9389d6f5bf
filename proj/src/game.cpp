#include "cupgame/game.hpp"

#include "cupgame/metrics.hpp"

#include <algorithm>

namespace cupgame {

Rational pour_budget_water(const GameConfig& cfg) {
  const Rational one(1);
  switch (cfg.kind()) {
    case VariantKind::SingleProcessor:
    case VariantKind::DynamicSingle:
      return one - cfg.epsilon;
    case VariantKind::MultiProcessor:
    case VariantKind::DynamicMulti:
    case VariantKind::RenormalizedMulti:
      return (one - cfg.epsilon) * cfg.p;
    case VariantKind::CupFlushing:
      return one;
    case VariantKind::UniversalEmptying:
      return Rational(cfg.p, 2);
  }
  return one;
}

std::optional<Rational> pour_cap_water(const GameConfig& cfg) {
  switch (cfg.kind()) {
    case VariantKind::MultiProcessor:
    case VariantKind::DynamicMulti:
      return Rational(1) - cfg.delta;
    case VariantKind::RenormalizedMulti:
      return Rational(1);
    default:
      return std::nullopt;
  }
}

VariantRules rules_for(const GameConfig& cfg) {
  const BigInt& D = cfg.resolution;
  VariantRules r;
  r.pour_budget = to_units(pour_budget_water(cfg), D);
  if (auto cap = pour_cap_water(cfg)) r.pour_cap = to_units(*cap, D);
  switch (cfg.kind()) {
    case VariantKind::SingleProcessor:
    case VariantKind::DynamicSingle:
      r.max_cups_emptied = 1;
      r.removal_cap = WaterAmount(D);
      break;
    case VariantKind::MultiProcessor:
    case VariantKind::DynamicMulti:
      r.max_cups_emptied = cfg.p;
      r.removal_cap = WaterAmount(D);
      break;
    case VariantKind::RenormalizedMulti:
      r.max_cups_emptied = cfg.p + 1;
      r.removal_cap = to_units(Rational(1) + 2 * cfg.delta, D);
      break;
    case VariantKind::CupFlushing:
      r.max_cups_emptied = 1;
      r.flush = true;
      break;
    case VariantKind::UniversalEmptying:
      r.max_cups_emptied = cfg.p;
      r.flush = true;
      break;
  }
  r.dynamic = is_dynamic(cfg.kind());
  return r;
}

std::optional<std::size_t> GameState::index_of(CupId id) const {
  if (dense_) {
    if (id < cups_.size()) return static_cast<std::size_t>(id);
    return std::nullopt;
  }
  auto it = std::lower_bound(cups_.begin(), cups_.end(), id, [](const Cup& c, CupId v) { return c.id < v; });
  if (it == cups_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - cups_.begin());
}

const Cup* GameState::find(CupId id) const {
  auto i = index_of(id);
  return i ? &cups_[*i] : nullptr;
}

GameState new_game(GameConfig cfg, const InitialFills& initial) {
  if (auto bad = validate_config(cfg); !bad.empty()) {
    std::string msg = "invalid config:";
    for (auto& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
  GameState s;
  s.rules_ = std::make_shared<const VariantRules>(rules_for(cfg));
  s.config_ = std::make_shared<const GameConfig>(std::move(cfg));
  const auto& c = *s.config_;
  const bool dyn = is_dynamic(c.kind());
  s.dense_ = !dyn;
  if (!dyn) {
    s.cups_.resize(static_cast<std::size_t>(c.n));
    for (std::size_t j = 0; j < s.cups_.size(); ++j) s.cups_[j].id = j;
    s.next_id_ = static_cast<CupId>(c.n);
    for (auto& [id, fill] : initial) {
      if (id >= s.cups_.size()) throw ConfigError("initial fill for unknown cup " + std::to_string(id));
      s.cups_[id].fill = fill;
      s.cups_[id].poured = fill;
    }
  } else {
    for (auto& [id, fill] : initial) {
      if (fill.is_zero()) throw ConfigError("initial fill of cup " + std::to_string(id) + " is zero in a dynamic game");
      s.cups_.push_back(Cup{id, fill, fill});
      s.next_id_ = id + 1;
    }
  }
  return s;
}

namespace {

std::optional<Violation> fail(std::string constraint, std::string detail) {
  return Violation{std::move(constraint), std::move(detail)};
}

std::string cup_str(CupId id) { return "cup " + std::to_string(id); }

}  // namespace

std::optional<Violation> validate_filler_move(const GameState& state, const FillerMove& move) {
  const VariantRules& r = state.rules();
  WaterAmount total;
  auto check_amount = [&](const Pour& p) -> std::optional<Violation> {
    if (p.amount.is_zero()) return fail("positive pour", cup_str(p.cup) + " receives nothing");
    if (!p.amount.is_even()) return fail("even units", cup_str(p.cup) + " receives an odd unit count " + p.amount.str());
    if (r.pour_cap && p.amount > *r.pour_cap)
      return fail("per-cup cap", cup_str(p.cup) + " receives " + p.amount.str() + " > " + r.pour_cap->str());
    total += p.amount;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < move.pours.size(); ++i) {
    const Pour& p = move.pours[i];
    if (i > 0 && move.pours[i - 1].cup >= p.cup) return fail("distinct cups", "pours must be sorted by strictly increasing id");
    if (!state.index_of(p.cup)) return fail("unknown cup", cup_str(p.cup) + " is not in the game");
    if (auto v = check_amount(p)) return v;
  }
  if (!move.new_cups.empty() && !r.dynamic) return fail("new cups", "only dynamic variants may add cups");
  for (std::size_t i = 0; i < move.new_cups.size(); ++i) {
    const Pour& p = move.new_cups[i];
    const CupId floor_id = i == 0 ? state.next_id() : move.new_cups[i - 1].cup + 1;
    if (p.cup < floor_id) return fail("fresh cup id", cup_str(p.cup) + " reuses or reorders an id");
    if (auto v = check_amount(p)) return v;
  }
  if (total > r.pour_budget) return fail("budget", "total pour " + total.str() + " > " + r.pour_budget.str());
  return std::nullopt;
}

std::optional<Violation> validate_emptier_move(const GameState& state, const EmptierMove& move) {
  const VariantRules& r = state.rules();
  if (static_cast<std::int64_t>(move.removals.size()) > r.max_cups_emptied)
    return fail("too many cups", std::to_string(move.removals.size()) + " > " + std::to_string(r.max_cups_emptied));
  const auto& slack = state.config().variant.flush_slack;
  std::optional<WaterAmount> top;
  if (slack) top = backlog(state);
  for (std::size_t i = 0; i < move.removals.size(); ++i) {
    const Pour& rm = move.removals[i];
    if (i > 0 && move.removals[i - 1].cup >= rm.cup)
      return fail("distinct cups", "removals must be sorted by strictly increasing id");
    const Cup* cup = state.find(rm.cup);
    if (!cup) return fail("unknown cup", cup_str(rm.cup) + " is not in the game");
    if (rm.amount.is_zero()) return fail("positive removal", cup_str(rm.cup) + " loses nothing");
    if (rm.amount > cup->fill)
      return fail("exceeds fill", cup_str(rm.cup) + " holds " + cup->fill.str() + " < " + rm.amount.str());
    if (r.flush && rm.amount != cup->fill)
      return fail("must flush entirely", cup_str(rm.cup) + " keeps " + (cup->fill - rm.amount).str());
    if (r.removal_cap && rm.amount > *r.removal_cap)
      return fail("per-cup cap", cup_str(rm.cup) + " loses " + rm.amount.str() + " > " + r.removal_cap->str());
    if (slack && cup->fill + *slack < *top)
      return fail("within slack of fullest", cup_str(rm.cup) + " is more than the slack below the fullest cup");
  }
  return std::nullopt;
}

WaterAmount backlog(const GameState& state) {
  const Cup* best = nullptr;
  for (const Cup& c : state.cups())
    if (!best || c.fill.units() > best->fill.units()) best = &c;
  return best ? best->fill : WaterAmount();
}

void apply_filler_move(GameState& state, const FillerMove& move) {
  if (auto v = validate_filler_move(state, move)) throw FillerMoveRejected(*v);
  for (const Pour& p : move.pours) {
    Cup& c = state.cups_[*state.index_of(p.cup)];
    c.fill += p.amount;
    c.poured += p.amount;
  }
  for (const Pour& p : move.new_cups) {
    state.cups_.push_back(Cup{p.cup, p.amount, p.amount});
    state.next_id_ = p.cup + 1;
  }
}

void apply_emptier_move(GameState& state, const EmptierMove& move) {
  if (auto v = validate_emptier_move(state, move))
    throw StrategyProtocolError("emptier move rejected: " + v->constraint + ": " + v->detail);
  for (const Pour& rm : move.removals) state.cups_[*state.index_of(rm.cup)].fill -= rm.amount;
}

void finish_step(GameState& state) {
  if (state.rules().dynamic) {
    std::erase_if(state.cups_, [](const Cup& c) { return c.fill.is_zero(); });
  }
  ++state.step_;
}

StepRecord play_step(GameState& state, FillerMove move, EmptierStrategy& emptier) {
  apply_filler_move(state, move);
  EmptierMove em = emptier.respond(state, move);
  try {
    apply_emptier_move(state, em);
  } catch (const StrategyProtocolError& e) {
    throw StrategyProtocolError(emptier.name() + ": " + e.what());
  }
  finish_step(state);

  StepRecord rec;
  rec.step = state.step();
  rec.filler = std::move(move);
  rec.emptier = std::move(em);
  rec.backlog = backlog(state);
  rec.integer_fill = integer_fill(state);
  EmptierStepMetrics m = emptier.step_metrics();
  rec.surplus = m.surplus;
  rec.counter_sum = std::move(m.counter_sum);
  rec.virtual_integer_fill = m.virtual_integer_fill;
  rec.virtual_backlog = std::move(m.virtual_backlog);
  return rec;
}

std::pair<GameState, StepRecord> step(const GameState& state, FillerMove move, EmptierStrategy& emptier) {
  GameState next = state;
  StepRecord rec = play_step(next, std::move(move), emptier);
  return {std::move(next), std::move(rec)};
}

StandardParameters renormalized_to_standard(std::int64_t p, const Rational& epsilon, const Rational& delta) {
  const Rational one(1);
  const Rational scale = one + 2 * delta;
  StandardParameters out;
  out.p = p + 1;
  out.epsilon = one - (one - epsilon) * p / (scale * (p + 1));
  out.delta = one - one / scale;
  out.unit_scale = scale;
  return out;
}

}  // namespace cupgame
