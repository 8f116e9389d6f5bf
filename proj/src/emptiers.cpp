#include "cupgame/emptiers.hpp"

#include "cupgame/rng.hpp"

#include <algorithm>

namespace cupgame {

WaterAmount greedy_removal(const GameState& state, const Cup& cup) {
  const VariantRules& r = state.rules();
  if (r.flush || !r.removal_cap) return cup.fill;
  return std::min(cup.fill, *r.removal_cap);
}

EmptierMove greedy_single_move(const GameState& state) { return greedy_multi_move(state, 1); }

EmptierMove greedy_multi_move(const GameState& state, std::int64_t k) {
  EmptierMove move;
  auto cups = state.cups();
  if (k <= 0) return move;
  if (k == 1) {
    const Cup* best = nullptr;
    for (const Cup& c : cups)
      if (!c.fill.is_zero() && (!best || c.fill.units() > best->fill.units())) best = &c;
    if (best) move.removals.push_back({best->id, greedy_removal(state, *best)});
    return move;
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < cups.size(); ++i)
    if (!cups[i].fill.is_zero()) idx.push_back(i);
  if (static_cast<std::int64_t>(idx.size()) > k) {
    auto fuller = [&](std::size_t a, std::size_t b) {
      int c = cups[a].fill.units().compare(cups[b].fill.units());
      return c != 0 ? c > 0 : a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), fuller);
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
  }
  for (std::size_t i : idx) move.removals.push_back({cups[i].id, greedy_removal(state, cups[i])});
  return move;
}

std::optional<std::size_t> smoothed_greedy_choice(std::span<const WaterAmount> virtual_fills, const BigInt& D) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < virtual_fills.size(); ++i)
    if (!best || virtual_fills[i].units() > virtual_fills[*best].units()) best = i;
  if (!best || virtual_fills[*best].units() < D) return std::nullopt;
  return best;
}

EmptierMove flush_greedy_move(const GameState& state, const WaterAmount& slack) {
  EmptierMove move;
  const WaterAmount top = backlog(state);
  if (top.is_zero()) return move;
  for (const Cup& c : state.cups()) {
    if (c.fill.is_zero()) continue;
    if (c.fill + slack >= top) {
      move.removals.push_back({c.id, c.fill});
      break;
    }
  }
  return move;
}

EmptierMove threshold_counter_move(const GameState& state, ThresholdState& thresholds, std::int64_t p, TieRule tie,
                                   std::span<const std::size_t> active) {
  auto cups = state.cups();
  struct Candidate {
    std::size_t cup;
    int cls;
  };
  std::vector<Candidate> cand;
  for (std::size_t j : active) {
    const WaterAmount& w = thresholds.counter(j);
    if (w.is_zero()) continue;
    if (w > cups[j].fill)
      throw InvariantViolation(state.step() + 1, "counter-sandwich",
                               "counter of cup " + std::to_string(j) + " exceeds its fill before removal");
    cand.push_back({j, w >= thresholds.increment() ? 0 : 1});
  }
  auto before = [&](const Candidate& a, const Candidate& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (tie == TieRule::Fullest) {
      int c = cups[a.cup].fill.units().compare(cups[b.cup].fill.units());
      if (c != 0) return c > 0;
    }
    return a.cup < b.cup;
  };
  const auto limit = static_cast<std::size_t>(p + 1);
  if (cand.size() > limit) {
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(limit), cand.end(), before);
    cand.resize(limit);
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.cup < b.cup; });
  const WaterAmount& cap = *state.rules().removal_cap;
  EmptierMove move;
  for (const Candidate& c : cand) {
    WaterAmount t = std::min(cap, thresholds.counter(c.cup));
    thresholds.decrement(c.cup, t);
    move.removals.push_back({cups[c.cup].id, std::move(t)});
  }
  return move;
}

// ---- smoothed greedy --------------------------------------------------------

void SmoothedGreedyEmptier::start(const GameState& s) {
  D_ = s.resolution();
  offsets_.clear();
  virtual_.clear();
  for (const Cup& c : s.cups()) {
    RngStream stream(ctx_.seed, "offset", {ctx_.trial, c.id});
    offsets_.push_back(uniform_threshold(stream, D_));
    virtual_.push_back(c.fill + offsets_.back());
  }
}

EmptierMove SmoothedGreedyEmptier::respond(const GameState& s, const FillerMove& pours) {
  for (const Pour& p : pours.pours) virtual_[p.cup] += p.amount;
  EmptierMove move;
  if (auto j = smoothed_greedy_choice(virtual_, D_)) {
    virtual_[*j] -= WaterAmount(D_);
    const Cup& cup = s.cups()[*j];
    move.removals.push_back({cup.id, std::min(cup.fill, WaterAmount(D_))});
  }
  return move;
}

EmptierStepMetrics SmoothedGreedyEmptier::step_metrics() const {
  EmptierStepMetrics m;
  std::int64_t whole = 0;
  const WaterAmount* top = nullptr;
  for (const WaterAmount& v : virtual_) {
    whole += whole_part(v, D_);
    if (!top || v > *top) top = &v;
  }
  m.virtual_integer_fill = whole;
  m.virtual_backlog = top ? *top : WaterAmount();
  return m;
}

// ---- threshold counters -----------------------------------------------------

ThresholdCounterEmptier::ThresholdCounterEmptier(const GameConfig& cfg, StreamContext ctx, TieRule tie, CounterInit init,
                                                 Fault fault)
    : p_(cfg.p),
      tie_(tie),
      init_(init),
      fault_(fault),
      thresholds_(static_cast<std::size_t>(cfg.n), cfg.resolution, cfg.delta,
                  ThresholdState::seeded(ctx.seed, ctx.trial, cfg.resolution)),
      in_active_(static_cast<std::size_t>(cfg.n), 0) {}

ThresholdCounterEmptier::ThresholdCounterEmptier(const GameConfig& cfg, ThresholdState::OffsetSource offsets, TieRule tie,
                                                 CounterInit init)
    : p_(cfg.p),
      tie_(tie),
      init_(init),
      fault_(Fault::None),
      thresholds_(static_cast<std::size_t>(cfg.n), cfg.resolution, cfg.delta, std::move(offsets)),
      in_active_(static_cast<std::size_t>(cfg.n), 0) {}

void ThresholdCounterEmptier::track(std::size_t cup) {
  if (!in_active_[cup] && !thresholds_.counter(cup).is_zero()) {
    in_active_[cup] = 1;
    active_.push_back(cup);
  }
}

void ThresholdCounterEmptier::start(const GameState& s) {
  for (const Cup& c : s.cups()) {
    if (c.fill.is_zero()) continue;
    thresholds_.init_from_initial_fill(c.id, c.fill, init_);
    track(c.id);
  }
}

EmptierMove ThresholdCounterEmptier::respond(const GameState& s, const FillerMove& pours) {
  ++steps_;
  std::int64_t k = 0;
  for (const Pour& p : pours.pours) {
    k += thresholds_.record_pour(p.cup, p.amount);
    track(p.cup);
  }
  last_crossings_ = k;
  last_surplus_ = surplus_of_step(k, p_);
  EmptierMove move = threshold_counter_move(s, thresholds_, p_, tie_, active_);
  if (fault_ == Fault::CounterDrift && steps_ % 64 == 0) {
    // Deliberate bug for mutation tests: water leaves but counters keep it.
    for (const Pour& rm : move.removals) thresholds_.corrupt_counter(rm.cup, rm.amount);
  }
  std::erase_if(active_, [&](std::size_t j) {
    if (!thresholds_.counter(j).is_zero()) return false;
    in_active_[j] = 0;
    return true;
  });
  return move;
}

EmptierStepMetrics ThresholdCounterEmptier::step_metrics() const {
  EmptierStepMetrics m;
  m.surplus = last_surplus_;
  m.counter_sum = thresholds_.counter_sum();
  return m;
}

// ---- registry ---------------------------------------------------------------

namespace {

struct EmptierInfo {
  std::string_view name;
  bool randomized;
  bool thresholds;
  std::vector<VariantKind> variants;  // empty = any
};

const std::vector<EmptierInfo>& emptier_table() {
  using V = VariantKind;
  static const std::vector<EmptierInfo> table{
      {"greedy_single", false, false, {V::SingleProcessor, V::DynamicSingle, V::UniversalEmptying}},
      {"smoothed_greedy", true, false, {V::SingleProcessor}},
      {"greedy_multi", false, false, {V::MultiProcessor, V::DynamicMulti, V::UniversalEmptying, V::RenormalizedMulti}},
      {"threshold_counter", true, true, {V::RenormalizedMulti}},
      {"smoothed_greedy_multi", true, true, {V::RenormalizedMulti}},
      {"flush_greedy", false, false, {V::CupFlushing}},
      {"flush_relaxed", false, false, {V::CupFlushing}},
      {"null", false, false, {}},
  };
  return table;
}

const EmptierInfo& lookup(const std::string& name) {
  for (const auto& e : emptier_table())
    if (e.name == name) return e;
  std::string known;
  for (const auto& e : emptier_table()) known += (known.empty() ? "" : ", ") + std::string(e.name);
  throw ConfigError("unknown emptier '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> emptier_names() {
  std::vector<std::string> out;
  for (const auto& e : emptier_table()) out.emplace_back(e.name);
  return out;
}

bool emptier_is_randomized(const std::string& name) { return lookup(name).randomized; }

bool emptier_uses_thresholds(const std::string& name) { return lookup(name).thresholds; }

std::unique_ptr<EmptierStrategy> make_emptier(const StrategySpec& spec, const GameConfig& cfg, StreamContext ctx,
                                              const EmptierOptions& opts) {
  const EmptierInfo& info = lookup(spec.name);
  if (!info.variants.empty() && std::find(info.variants.begin(), info.variants.end(), cfg.kind()) == info.variants.end()) {
    std::string plays;
    for (VariantKind v : info.variants) plays += (plays.empty() ? "" : ", ") + std::string(variant_name(v));
    throw ConfigError("emptier " + spec.name + " does not play the " + std::string(variant_name(cfg.kind())) +
                      " game (plays: " + plays + ")");
  }
  const std::string& n = spec.name;
  if (n == "greedy_single") {
    require_known_params(spec, {});
    return std::make_unique<GreedyEmptier>(n, 1);
  }
  if (n == "greedy_multi") {
    require_known_params(spec, {});
    return std::make_unique<GreedyEmptier>(n, rules_for(cfg).max_cups_emptied);
  }
  if (n == "smoothed_greedy") {
    require_known_params(spec, {});
    return std::make_unique<SmoothedGreedyEmptier>(ctx);
  }
  if (n == "threshold_counter" || n == "smoothed_greedy_multi") {
    require_known_params(spec, {"fault"});
    const std::string fault = param_string(spec, "fault", "none");
    auto f = ThresholdCounterEmptier::Fault::None;
    if (fault == "counter_drift")
      f = ThresholdCounterEmptier::Fault::CounterDrift;
    else if (fault != "none")
      throw ConfigError(n + ": unknown fault '" + fault + "'");
    if (auto bad = validate_config(cfg, {.threshold_emptier = true}); !bad.empty()) throw ConfigError(n + ": " + bad.front());
    const TieRule tie = n == "threshold_counter" ? TieRule::Arbitrary : TieRule::Fullest;
    return std::make_unique<ThresholdCounterEmptier>(cfg, ctx, tie, opts.counter_init, f);
  }
  if (n == "flush_greedy") {
    require_known_params(spec, {});
    return std::make_unique<FlushEmptier>(WaterAmount());
  }
  if (n == "flush_relaxed") {
    require_known_params(spec, {"slack"});
    return std::make_unique<FlushEmptier>(to_units(param_rational(spec, "slack", Rational(1)), cfg.resolution));
  }
  require_known_params(spec, {});
  return std::make_unique<NullEmptier>();
}

}  // namespace cupgame
