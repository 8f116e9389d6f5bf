#include "cupgame/fillers.hpp"

#include "cupgame/emptiers.hpp"
#include "cupgame/trace_io.hpp"

#include <algorithm>
#include <limits>

namespace cupgame {

WaterAmount even_floor(const WaterAmount& w) {
  if (w.is_even()) return w;
  return WaterAmount(BigInt(w.units() - 1));
}

FillerMove equal_split_move(std::span<const CupId> cups, const WaterAmount& budget) {
  FillerMove move;
  if (cups.empty()) return move;
  const BigInt m(cups.size());
  BigInt share, rem;
  divide_qr(budget.units(), m, share, rem);
  if (!rem.is_zero() || bit_test(share, 0) || share.is_zero())
    throw NonRepresentable("cannot split " + budget.str() + " units into " + m.str() + " equal even shares");
  WaterAmount each(share);
  move.pours.reserve(cups.size());
  for (CupId id : cups) move.pours.push_back({id, each});
  return move;
}

// ---- compact trace ----------------------------------------------------------

void CompactTrace::encode(const std::vector<Pour>& in, std::vector<Run>& out) {
  for (const Pour& p : in) {
    if (!out.empty() && out.back().first + out.back().count == p.cup && out.back().amount == p.amount) {
      ++out.back().count;
    } else {
      out.push_back({p.cup, 1, p.amount});
    }
  }
}

void CompactTrace::decode(const std::vector<Run>& in, std::vector<Pour>& out) {
  std::size_t total = 0;
  for (const Run& r : in) total += r.count;
  out.reserve(total);
  for (const Run& r : in)
    for (std::uint64_t k = 0; k < r.count; ++k) out.push_back({r.first + k, r.amount});
}

void CompactTrace::append(const FillerMove& move) {
  Step s;
  encode(move.pours, s.pours);
  encode(move.new_cups, s.fresh);
  steps_.push_back(std::move(s));
}

FillerMove CompactTrace::move(std::size_t index) const {
  FillerMove m;
  if (index >= steps_.size()) return m;
  decode(steps_[index].pours, m.pours);
  decode(steps_[index].fresh, m.new_cups);
  return m;
}

FillerMove TraceFiller::next_move(const FillerView& view) {
  return trace_->move(static_cast<std::size_t>(view.step - 1));
}

// ---- adaptive harmonic ------------------------------------------------------

namespace {

WaterAmount exact_budget(const GameConfig& cfg, const Rational& fraction) {
  if (fraction < 0 || fraction > 1) throw ConfigError("budget fraction must lie in [0, 1]");
  return to_units(pour_budget_water(cfg) * fraction, cfg.resolution);
}

WaterAmount even_budget(const GameConfig& cfg, const Rational& fraction) {
  if (fraction < 0 || fraction > 1) throw ConfigError("budget fraction must lie in [0, 1]");
  Rational b = pour_budget_water(cfg) * fraction * cfg.resolution;
  BigInt whole = numerator(b) / denominator(b);
  return even_floor(WaterAmount(whole));
}

}  // namespace

AdaptiveHarmonicFiller::AdaptiveHarmonicFiller(const GameConfig& cfg, const Rational& budget_fraction,
                                               std::int64_t new_cups, std::int64_t max_cups)
    : kind_(cfg.kind()),
      last_step_(0),
      budget_(exact_budget(cfg, budget_fraction)),
      new_cups_(new_cups),
      max_cups_(max_cups) {
  if (auto cap = pour_cap_water(cfg)) cap_ = to_units(*cap, cfg.resolution);
  if (kind_ == VariantKind::UniversalEmptying) {
    if (cfg.n % cfg.p != 0) throw SetupError("adaptive_harmonic: n must be a multiple of p");
    last_step_ = cfg.n / cfg.p - 1;
  }
  if (kind_ == VariantKind::CupFlushing) throw ConfigError("adaptive_harmonic does not play the cup_flushing game");
}

FillerMove AdaptiveHarmonicFiller::next_move(const FillerView& view) {
  if (!view.state) throw SetupError("adaptive_harmonic needs the game state");
  const GameState& s = *view.state;
  if (!started_) {
    for (const Cup& c : s.cups()) untouched_.push_back(c.id);
    started_ = true;
  } else if (view.last_emptier_move) {
    const auto& rm = view.last_emptier_move->removals;
    std::vector<CupId> kept;
    kept.reserve(untouched_.size());
    std::size_t r = 0;
    for (CupId id : untouched_) {
      while (r < rm.size() && rm[r].cup < id) ++r;
      if (r < rm.size() && rm[r].cup == id) continue;
      kept.push_back(id);
    }
    untouched_ = std::move(kept);
  }
  if (kind_ == VariantKind::UniversalEmptying && view.step > last_step_) return {};
  if (budget_.is_zero()) return {};

  std::vector<CupId> fresh;
  if (is_dynamic(kind_)) {
    const auto room = max_cups_ - static_cast<std::int64_t>(s.size());
    for (std::int64_t k = 0; k < std::min(new_cups_, room); ++k) fresh.push_back(s.next_id() + static_cast<CupId>(k));
  }
  auto share_too_big = [&](std::size_t m) {
    return cap_ && m > 0 && budget_.units() > cap_->units() * m;
  };
  if (kind_ != VariantKind::UniversalEmptying) {
    const std::size_t m = untouched_.size() + fresh.size();
    if (m == 0 || share_too_big(m)) {
      untouched_.clear();
      for (const Cup& c : s.cups()) untouched_.push_back(c.id);
    }
  }
  std::vector<CupId> all = untouched_;
  all.insert(all.end(), fresh.begin(), fresh.end());
  if (all.empty()) return {};
  FillerMove move;
  if (share_too_big(all.size())) {
    for (CupId id : all) move.pours.push_back({id, *cap_});
  } else {
    move = equal_split_move(all, budget_);
  }
  if (!fresh.empty()) {
    const auto split = move.pours.end() - static_cast<std::ptrdiff_t>(fresh.size());
    move.new_cups.assign(split, move.pours.end());
    move.pours.erase(split, move.pours.end());
    untouched_.insert(untouched_.end(), fresh.begin(), fresh.end());
  }
  return move;
}

// ---- oblivious guessing -----------------------------------------------------

ObliviousGuessingFiller::ObliviousGuessingFiller(const GameConfig& cfg, std::int64_t k, StreamContext ctx)
    : p_(cfg.p), last_step_(0), budget_(exact_budget(cfg, Rational(1))), rng_(ctx.seed, "filler", {ctx.trial}) {
  if (cfg.kind() != VariantKind::UniversalEmptying)
    throw ConfigError("oblivious_guessing only plays the universal game");
  if (k % p_ != 0 || k < 2 * p_ || k > cfg.n) throw ConfigError("oblivious_guessing: k must be a multiple of p in [2p, n]");
  last_step_ = k / p_ - 1;
  for (std::int64_t j = 0; j < k; ++j) candidates_.push_back(static_cast<CupId>(j));
}

FillerMove ObliviousGuessingFiller::next_move(const FillerView& view) {
  if (view.step > last_step_) return {};
  FillerMove move = equal_split_move(candidates_, budget_);
  // Partial Fisher-Yates: the first p slots become the guess.
  std::vector<CupId> pool = candidates_;
  for (std::int64_t i = 0; i < p_; ++i) {
    auto j = static_cast<std::size_t>(i) + rng_.uniform_below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  std::vector<CupId> guess(pool.begin(), pool.begin() + p_);
  std::sort(guess.begin(), guess.end());
  std::vector<CupId> rest;
  std::set_difference(candidates_.begin(), candidates_.end(), guess.begin(), guess.end(), std::back_inserter(rest));
  candidates_ = std::move(rest);
  guesses_.push_back(std::move(guess));
  return move;
}

// ---- uniform random ---------------------------------------------------------

UniformRandomFiller::UniformRandomFiller(const GameConfig& cfg, const Rational& budget_fraction, StreamContext ctx,
                                         std::int64_t new_cups, std::int64_t max_cups)
    : dynamic_(is_dynamic(cfg.kind())),
      n_(cfg.n),
      budget_(even_budget(cfg, budget_fraction)),
      rng_(ctx.seed, "filler", {ctx.trial}),
      new_cups_(new_cups),
      max_cups_(max_cups) {
  auto cap = pour_cap_water(cfg);
  cap_ = cap ? even_floor(to_units(*cap, cfg.resolution)) : budget_;
  if (cap_ > budget_) cap_ = budget_;
}

FillerMove UniformRandomFiller::next_move(const FillerView& view) {
  FillerMove move;
  if (budget_.units() < 2) return move;
  std::vector<CupId> ids;
  std::size_t existing = 0;
  if (dynamic_) {
    if (!view.state) throw SetupError("uniform_random needs the game state in dynamic games");
    for (const Cup& c : view.state->cups()) ids.push_back(c.id);
    existing = ids.size();
    const auto room = max_cups_ - static_cast<std::int64_t>(existing);
    for (std::int64_t k = 0; k < std::min(new_cups_, room); ++k) ids.push_back(view.state->next_id() + static_cast<CupId>(k));
  } else {
    for (std::int64_t j = 0; j < n_; ++j) ids.push_back(static_cast<CupId>(j));
    existing = ids.size();
  }
  if (ids.empty()) return move;

  std::vector<WaterAmount> acc(ids.size());
  BigInt remaining = budget_.units();
  const BigInt& cap = cap_.units();
  // New cups must receive something; seed each with the smallest pour.
  const std::size_t fresh = ids.size() - existing;
  for (std::size_t k = 0; k < fresh && remaining >= 2; ++k) {
    acc[existing + k] = WaterAmount(2);
    remaining -= 2;
  }
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (cap - acc[i].units() >= 2) open.push_back(i);
  constexpr auto u64_max = std::numeric_limits<std::uint64_t>::max();
  if (cap <= u64_max / 2 && remaining <= u64_max) {
    // Same draws as below, in machine words.
    std::vector<std::uint64_t> small(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) small[i] = acc[i].units().convert_to<std::uint64_t>();
    const std::uint64_t cap64 = cap.convert_to<std::uint64_t>();
    std::uint64_t rem = remaining.convert_to<std::uint64_t>();
    while (rem >= 2 && !open.empty()) {
      const std::size_t slot = rng_.uniform_below(open.size());
      const std::size_t i = open[slot];
      const std::uint64_t room = cap64 - small[i];
      const std::uint64_t chunk = 2 * (1 + rng_.uniform_below(std::min(room, rem) / 2));
      small[i] += chunk;
      rem -= chunk;
      if (room - chunk < 2) {
        open[slot] = open.back();
        open.pop_back();
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (small[i] == 0) continue;
      (i < existing ? move.pours : move.new_cups).push_back({ids[i], WaterAmount(BigInt(small[i]))});
    }
    return move;
  }
  while (remaining >= 2 && !open.empty()) {
    const std::size_t slot = rng_.uniform_below(open.size());
    const std::size_t i = open[slot];
    BigInt room = cap - acc[i].units();
    BigInt hi = std::min(room, remaining);
    BigInt chunk = 2 * (1 + rng_.uniform_below(BigInt(hi / 2)));
    acc[i] += WaterAmount(chunk);
    remaining -= chunk;
    if (room - chunk < 2) {
      open[slot] = open.back();
      open.pop_back();
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (acc[i].is_zero()) continue;
    (i < existing ? move.pours : move.new_cups).push_back({ids[i], std::move(acc[i])});
  }
  return move;
}

// ---- simple oblivious fillers -----------------------------------------------

SingleTargetFiller::SingleTargetFiller(const GameConfig& cfg, const Rational& budget_fraction, CupId target)
    : target_(target), amount_(even_budget(cfg, budget_fraction)) {
  if (target >= static_cast<CupId>(cfg.n)) throw ConfigError("single_target: target outside 0..n-1");
  if (auto cap = pour_cap_water(cfg)) amount_ = std::min(amount_, even_floor(to_units(*cap, cfg.resolution)));
}

FillerMove SingleTargetFiller::next_move(const FillerView&) {
  FillerMove m;
  if (!amount_.is_zero()) m.pours.push_back({target_, amount_});
  return m;
}

RoundRobinFiller::RoundRobinFiller(const GameConfig& cfg, const Rational& budget_fraction, std::int64_t width)
    : width_(width), budget_(even_budget(cfg, budget_fraction)), chunk_(budget_) {
  if (width < 1 || width > cfg.n) throw ConfigError("round_robin: width must lie in [1, n]");
  if (auto cap = pour_cap_water(cfg)) chunk_ = std::min(chunk_, even_floor(to_units(*cap, cfg.resolution)));
}

FillerMove RoundRobinFiller::next_move(const FillerView&) {
  FillerMove m;
  if (chunk_.is_zero()) return m;
  WaterAmount left = budget_;
  for (std::int64_t k = 0; k < width_ && left.units() >= 2; ++k) {
    WaterAmount a = std::min(chunk_, left);
    left -= a;
    m.pours.push_back({static_cast<CupId>(cursor_), std::move(a)});
    cursor_ = (cursor_ + 1) % width_;
  }
  std::sort(m.pours.begin(), m.pours.end(), [](const Pour& a, const Pour& b) { return a.cup < b.cup; });
  return m;
}

// ---- offline simulation -----------------------------------------------------

std::shared_ptr<const CompactTrace> simulate_adaptive_trace(const GameConfig& cfg, const StrategySpec& target) {
  if (emptier_is_randomized(target.name))
    throw SetupError("simulated_adaptive: target emptier " + target.name + " is randomized, so its moves cannot be precomputed");
  GameConfig sim = cfg;
  sim.variant = GameVariant{VariantKind::UniversalEmptying, std::nullopt};
  GameState state = new_game(sim);
  auto emptier = make_emptier(target, sim, StreamContext{cfg.seed, 0});
  AdaptiveHarmonicFiller filler(sim, Rational(1), 0, sim.n);
  emptier->start(state);
  auto trace = std::make_shared<CompactTrace>();
  EmptierMove last;
  const std::int64_t steps = sim.n / sim.p - 1;
  for (std::int64_t i = 1; i <= steps; ++i) {
    FillerView view{i, &state.config(), &state, i > 1 ? &last : nullptr};
    FillerMove move = filler.next_move(view);
    trace->append(move);
    StepRecord rec = play_step(state, std::move(move), *emptier);
    last = std::move(rec.emptier);
  }
  return trace;
}

// ---- registry ---------------------------------------------------------------

std::vector<std::string> filler_names() {
  return {"adaptive_harmonic", "oblivious_guessing", "uniform_random", "single_target",
          "round_robin",       "trace",              "simulated_adaptive"};
}

bool filler_is_adaptive(const StrategySpec& spec, const GameConfig& cfg) {
  if (spec.name == "adaptive_harmonic") return true;
  if (spec.name == "uniform_random") return is_dynamic(cfg.kind());
  return false;
}

namespace {

BigInt split_divisor(const Rational& budget, const std::optional<Rational>& cap, std::int64_t lo, std::int64_t hi,
                     std::int64_t stride) {
  BigInt d = 2;
  for (std::int64_t m = lo; m <= hi; m += stride) {
    Rational share = budget / m;
    if (cap && share > *cap) continue;
    d = lcm_of(d, denominator(Rational(share / 2)));
  }
  return d;
}

void require_fixed_cups(const StrategySpec& spec, const GameConfig& cfg) {
  if (is_dynamic(cfg.kind())) throw ConfigError(spec.name + " does not play dynamic games");
}

}  // namespace

BigInt filler_resolution_divisor(const StrategySpec& spec, const GameConfig& cfg) {
  if (spec.name == "adaptive_harmonic" || spec.name == "simulated_adaptive") {
    GameConfig c = cfg;
    if (spec.name == "simulated_adaptive") c.variant = GameVariant{VariantKind::UniversalEmptying, std::nullopt};
    const Rational budget = pour_budget_water(c) * param_rational(spec, "budget", Rational(1));
    if (c.kind() == VariantKind::UniversalEmptying) return split_divisor(budget, std::nullopt, 2 * c.p, c.n, c.p);
    const std::int64_t top = is_dynamic(c.kind()) ? param_int(spec, "max_cups", c.n) : c.n;
    return split_divisor(budget, pour_cap_water(c), 1, top, 1);
  }
  if (spec.name == "oblivious_guessing") {
    const std::int64_t k = param_int(spec, "k", cfg.n);
    return split_divisor(pour_budget_water(cfg), std::nullopt, 2 * cfg.p, k, cfg.p);
  }
  if (spec.name == "trace") return read_trace_file(param_string(spec, "path", "")).header.config.resolution;
  return 2;
}

FillerFactory::FillerFactory(StrategySpec spec, GameConfig cfg) : spec_(std::move(spec)), cfg_(std::move(cfg)) {
  const std::string& n = spec_.name;
  const std::vector<std::string> names = filler_names();
  if (std::find(names.begin(), names.end(), n) == names.end()) {
    std::string all;
    for (auto& f : names) all += (all.empty() ? "" : ", ") + f;
    throw ConfigError("unknown filler '" + n + "' (known: " + all + ")");
  }
  model_ = filler_is_adaptive(spec_, cfg_) ? InformationModel::Adaptive : InformationModel::Oblivious;
  if (n == "simulated_adaptive") {
    require_known_params(spec_, {"target"});
    require_fixed_cups(spec_, cfg_);
    trace_ = simulate_adaptive_trace(cfg_, StrategySpec{param_string(spec_, "target", "greedy_multi"), {}});
  } else if (n == "trace") {
    require_known_params(spec_, {"path"});
    TraceFile file = read_trace_file(param_string(spec_, "path", ""));
    const BigInt& from = file.header.config.resolution;
    if (cfg_.resolution % from != 0)
      throw ConfigError("trace: D=" + cfg_.resolution.str() + " is not a multiple of the trace's D=" + from.str());
    const BigInt scale = cfg_.resolution / from;
    auto trace = std::make_shared<CompactTrace>();
    for (StepRecord& r : file.records) {
      for (Pour& p : r.filler.pours) p.amount = WaterAmount(BigInt(p.amount.units() * scale));
      for (Pour& p : r.filler.new_cups) p.amount = WaterAmount(BigInt(p.amount.units() * scale));
      trace->append(r.filler);
    }
    trace_ = trace;
  }
  // Surface parameter and variant errors before any trial runs.
  (void)make(StreamContext{cfg_.seed, 0});
}

std::unique_ptr<FillerStrategy> FillerFactory::make(StreamContext ctx) const {
  const std::string& n = spec_.name;
  const Rational budget = param_rational(spec_, "budget", Rational(1));
  if (n == "adaptive_harmonic") {
    require_known_params(spec_, {"budget", "new_cups", "max_cups"});
    return std::make_unique<AdaptiveHarmonicFiller>(cfg_, budget, param_int(spec_, "new_cups", 1),
                                                    param_int(spec_, "max_cups", cfg_.n));
  }
  if (n == "oblivious_guessing") {
    require_known_params(spec_, {"k"});
    return std::make_unique<ObliviousGuessingFiller>(cfg_, param_int(spec_, "k", cfg_.n), ctx);
  }
  if (n == "uniform_random") {
    require_known_params(spec_, {"budget", "new_cups", "max_cups"});
    return std::make_unique<UniformRandomFiller>(cfg_, budget, ctx, param_int(spec_, "new_cups", 1),
                                                 param_int(spec_, "max_cups", cfg_.n));
  }
  if (n == "single_target") {
    require_known_params(spec_, {"budget", "target"});
    require_fixed_cups(spec_, cfg_);
    return std::make_unique<SingleTargetFiller>(cfg_, budget, static_cast<CupId>(param_int(spec_, "target", 0)));
  }
  if (n == "round_robin") {
    require_known_params(spec_, {"budget", "width"});
    require_fixed_cups(spec_, cfg_);
    return std::make_unique<RoundRobinFiller>(cfg_, budget, param_int(spec_, "width", cfg_.n));
  }
  return std::make_unique<TraceFiller>(n, trace_);
}

}  // namespace cupgame
