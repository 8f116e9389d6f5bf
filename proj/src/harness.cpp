#include "cupgame/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <map>
#include <exception>

namespace cupgame {

std::string_view verify_level_name(VerifyLevel v) {
  switch (v) {
    case VerifyLevel::Off: return "off";
    case VerifyLevel::Invariants: return "invariants";
    case VerifyLevel::Full: return "full";
  }
  return "?";
}

VerifyLevel parse_verify_level(std::string_view s) {
  if (s == "off") return VerifyLevel::Off;
  if (s == "invariants") return VerifyLevel::Invariants;
  if (s == "full") return VerifyLevel::Full;
  throw ConfigError("verify level must be off, invariants or full (got '" + std::string(s) + "')");
}

std::string_view placement_name(Placement p) { return p == Placement::OneCup ? "one_cup" : "uniform"; }

Placement parse_placement(std::string_view s) {
  if (s == "one_cup") return Placement::OneCup;
  if (s == "uniform") return Placement::Uniform;
  throw ConfigError("recovery placement must be one_cup or uniform (got '" + std::string(s) + "')");
}

// ---- setup ------------------------------------------------------------------

namespace {

// Water per loaded cup.
Rational recovery_share(const RecoverySpec& r, std::int64_t n) {
  return r.placement == Placement::OneCup ? r.total : r.total / n;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace

ExperimentSpec resolve_spec(ExperimentSpec spec) {
  GameConfig& cfg = spec.config;
  if (spec.steps < 1) throw ConfigError("steps must be at least 1");
  if (spec.trials < 1) throw ConfigError("trials must be at least 1");
  const bool thresholds = emptier_uses_thresholds(spec.emptier.name);
  if (spec.recovery) {
    if (cfg.kind() != VariantKind::SingleProcessor && cfg.kind() != VariantKind::RenormalizedMulti)
      throw ConfigError("recovery applies only to the single and renormalized games");
    if (spec.recovery->total < 0) throw ConfigError("recovery total must be non-negative");
  }
  if (spec.auto_resolution) {
    // Seed with a valid D so the divisor queries see a consistent config.
    GameConfig probe = cfg;
    probe.resolution = 2;
    BigInt D = default_resolution(probe);
    probe.resolution = D;
    D = lcm_of(D, filler_resolution_divisor(spec.filler, probe));
    if (spec.recovery) D = lcm_of(D, 2 * denominator(recovery_share(*spec.recovery, cfg.n)));
    cfg.resolution = D;
  }
  if (auto bad = validate_config(cfg, {.threshold_emptier = thresholds}); !bad.empty()) throw ConfigError(join(bad));
  if (!spec.auto_resolution) {
    const BigInt need = filler_resolution_divisor(spec.filler, cfg);
    if (cfg.resolution % need != 0)
      throw ConfigError("D=" + cfg.resolution.str() + " is not divisible by " + need.str() + ", which filler " +
                        spec.filler.name + " needs for exact even pours");
  }
  for (std::int64_t c : spec.checkpoints)
    if (c < 0 || c > spec.steps) throw ConfigError("checkpoint " + std::to_string(c) + " outside 0..steps");
  FillerFactory probe(spec.filler, cfg);
  if (spec.oblivious_only && probe.information_model() == InformationModel::Adaptive)
    throw ConfigError("filler " + spec.filler.name + " is adaptive but --oblivious-only was requested");
  (void)make_emptier(spec.emptier, cfg, {cfg.seed, 0}, {spec.counter_init});
  (void)setup_recovery(spec);
  return spec;
}

InitialFills setup_recovery(const ExperimentSpec& spec) {
  InitialFills out;
  if (!spec.recovery || spec.recovery->total == 0) return out;
  const GameConfig& cfg = spec.config;
  const Rational share = recovery_share(*spec.recovery, cfg.n) * cfg.resolution;
  if (denominator(share) != 1 || bit_test(numerator(share), 0))
    throw NonRepresentable("recovery water " + format_rational(spec.recovery->total) +
                           " does not split into even unit counts at D=" + cfg.resolution.str());
  const WaterAmount w(numerator(share));
  if (spec.recovery->placement == Placement::OneCup) {
    out[0] = w;
  } else {
    for (std::int64_t j = 0; j < cfg.n; ++j) out[static_cast<CupId>(j)] = w;
  }
  return out;
}

// ---- invariant checks -------------------------------------------------------

namespace {

enum class Check { Conservation, ActiveSet, Sandwich, CounterWater, Witness, Offset, Harmonic, Potential };
constexpr std::size_t kChecks = 8;
constexpr const char* kCheckNames[kChecks] = {"water-conservation",  "active-set",     "counter-sandwich",
                                              "counter-water-bound", "witness-contrapositive", "offset-mod-one",
                                              "harmonic-average-bound", "potential-case1"};

/// Per-step checks. Each check looks at the cups the step touched; the full
/// level also sweeps every cup.
class InvariantChecker {
 public:
  InvariantChecker(const ExperimentSpec& spec, const GameState& state, EmptierStrategy& emptier)
      : level_(spec.verify), D_(state.resolution()), eps_(state.config().epsilon), p_(state.config().p) {
    if (level_ == VerifyLevel::Off) return;
    const GameConfig& cfg = state.config();
    dynamic_ = is_dynamic(cfg.kind());
    threshold_ = dynamic_cast<ThresholdCounterEmptier*>(&emptier);
    smoothed_ = dynamic_cast<SmoothedGreedyEmptier*>(&emptier);
    if (threshold_) {
      witness_.emplace(cfg.delta);
      three_ = WaterAmount(BigInt(3 * D_));
    }
    harmonic_ = cfg.kind() == VariantKind::DynamicSingle && emptier.name() == "greedy_single";
    potential_ = level_ == VerifyLevel::Full && cfg.kind() == VariantKind::MultiProcessor &&
                 emptier.name() == "greedy_multi";
    shadow_.resize(state.next_id());
    stamp_.resize(state.next_id(), -1);
    for (const Cup& c : state.cups()) add(c.id, c.fill);
    sweep(state, 0);
  }

  std::map<std::string, std::int64_t> counts() const {
    std::map<std::string, std::int64_t> out;
    for (std::size_t k = 0; k < kChecks; ++k)
      if (counts_[k] > 0) out[kCheckNames[k]] = counts_[k];
    return out;
  }

  void after_step(const GameState& state, const StepRecord& rec) {
    if (level_ == VerifyLevel::Off) return;
    const std::int64_t i = rec.step;
    touched_.clear();
    before_.clear();
    if (shadow_.size() < state.next_id()) {
      shadow_.resize(state.next_id());
      stamp_.resize(state.next_id(), -1);
    }
    auto note = [&](CupId id) {
      if (id >= shadow_.size()) fail(i, "water-conservation", "move names cup " + std::to_string(id) + " beyond the last id");
      if (stamp_[id] == i) return;
      stamp_[id] = i;
      touched_.push_back(id);
      if (potential_) before_.push_back({id, shadow_[id]});
    };
    for (const Pour& p : rec.filler.pours) note(p.cup);
    for (const Pour& p : rec.filler.new_cups) note(p.cup);
    for (const Pour& p : rec.emptier.removals) note(p.cup);

    // Water conservation against a ledger built from the moves alone.
    for (const Pour& p : rec.filler.pours) add(p.cup, p.amount);
    for (const Pour& p : rec.filler.new_cups) add(p.cup, p.amount);
    for (const Pour& p : rec.emptier.removals) {
      WaterAmount& w = shadow_[p.cup];
      if (w < p.amount) fail(i, "water-conservation", "cup " + std::to_string(p.cup) + " lost more water than it held");
      w -= p.amount;
      total_ -= p.amount.units();
      if (w.is_zero()) --holding_;
    }
    for (CupId id : touched_) {
      count(Check::Conservation);
      const Cup* c = state.find(id);
      const WaterAmount actual = c ? c->fill : WaterAmount();
      if (!(shadow_[id] == actual))
        fail(i, "water-conservation",
             "cup " + std::to_string(id) + " holds " + actual.str() + " units, moves imply " + shadow_[id].str());
    }

    if (dynamic_) check_active_set(state, i);
    if (threshold_) check_counters(state, i, rec);
    if (smoothed_) check_offsets(state, i);
    if (harmonic_) check_harmonic(state, i);
    if (potential_) check_potential(state, i, rec);
    if (level_ == VerifyLevel::Full) sweep(state, i);
  }

 private:
  void add(CupId id, const WaterAmount& w) {
    WaterAmount& cur = shadow_[id];
    if (cur.is_zero() && !w.is_zero()) ++holding_;
    cur += w;
    total_ += w.units();
  }

  void count(Check c) { ++counts_[static_cast<std::size_t>(c)]; }

  [[noreturn]] void fail(std::int64_t step, const std::string& name, const std::string& detail) {
    throw InvariantViolation(step, name, detail);
  }

  void sweep(const GameState& state, std::int64_t i) {
    std::size_t nonzero = 0;
    for (const Cup& c : state.cups()) {
      count(Check::Conservation);
      if (!(shadow_[c.id] == c.fill)) fail(i, "water-conservation", "cup " + std::to_string(c.id) + " drifted from its moves");
      if (!c.fill.is_zero()) ++nonzero;
      if (threshold_) sandwich(c.id, c.fill, i);
      if (smoothed_) offset_check(state, c, i);
    }
    if (nonzero != holding_) fail(i, "water-conservation", "cups with water differ from the move ledger");
  }

  void check_active_set(const GameState& state, std::int64_t i) {
    count(Check::ActiveSet);
    auto cups = state.cups();
    if (cups.size() != holding_)
      fail(i, "active-set", std::to_string(cups.size()) + " cups present, " + std::to_string(holding_) +
                                " hold water");
    for (std::size_t k = 0; k < cups.size(); ++k) {
      if (cups[k].fill.is_zero()) fail(i, "active-set", "empty cup " + std::to_string(cups[k].id) + " still present");
      if (k > 0 && cups[k - 1].id >= cups[k].id) fail(i, "active-set", "cup ids out of order");
      if (cups[k].id >= state.next_id()) fail(i, "active-set", "cup id at or beyond the next fresh id");
    }
  }

  void sandwich(std::size_t j, const WaterAmount& f, std::int64_t i) {
    count(Check::Sandwich);
    const WaterAmount& w = threshold_->thresholds().counter(j);
    if (w > f)
      fail(i, "counter-sandwich", "cup " + std::to_string(j) + ": counter " + w.str() + " exceeds fill " + f.str());
    if (f > w + three_)
      fail(i, "counter-sandwich", "cup " + std::to_string(j) + ": fill " + f.str() + " exceeds counter " + w.str() +
                                      " by more than 3");
    const BigInt& du = threshold_->thresholds().delta_units().units();
    const bool whole = w.units() <= std::numeric_limits<std::uint64_t>::max() && du <= std::numeric_limits<std::uint64_t>::max()
                           ? w.units().convert_to<std::uint64_t>() % du.convert_to<std::uint64_t>() == 0
                           : BigInt(w.units() % du) == 0;
    if (!whole)
      fail(i, "counter-multiple-of-delta", "cup " + std::to_string(j) + ": counter " + w.str());
  }

  void check_counters(const GameState& state, std::int64_t i, const StepRecord& rec) {
    for (CupId id : touched_) sandwich(id, state.cups()[id].fill, i);
    count(Check::CounterWater);
    const WaterAmount& sum = threshold_->thresholds().counter_sum();
    if (sum.units() > total_) fail(i, "counter-water-bound", "counters sum to more than the water present");
    const bool witness = witness_->push(rec.surplus);
    if (!sum.is_zero()) count(Check::Witness);
    if (!sum.is_zero() && !witness)
      fail(i, "witness-contrapositive", "counters sum to " + sum.str() + " units but no height-0 backlog witness exists");
  }

  void offset_check(const GameState& state, const Cup& c, std::int64_t i) {
    count(Check::Offset);
    const std::size_t j = *state.index_of(c.id);
    const WaterAmount& v = smoothed_->virtual_fills()[j];
    const WaterAmount& r = smoothed_->offsets()[j];
    if (v.units() % D_ != (r.units() + c.poured.units()) % D_)
      fail(i, "offset-mod-one", "cup " + std::to_string(c.id) + ": virtual fill " + v.str() +
                                    " is not offset plus poured water modulo one");
    if (c.fill > v || !(v.units() - c.fill.units() < D_))
      fail(i, "virtual-fill-bound", "cup " + std::to_string(c.id) + ": virtual fill " + v.str() + ", fill " +
                                        c.fill.str());
  }

  void check_offsets(const GameState& state, std::int64_t i) {
    for (CupId id : touched_)
      if (const Cup* c = state.find(id)) offset_check(state, *c, i);
  }

  const Rational& harmonic(std::int64_t k) {
    while (static_cast<std::int64_t>(h_.size()) <= k) h_.push_back(h_.back() + Rational(1, static_cast<std::int64_t>(h_.size())));
    return h_[static_cast<std::size_t>(k)];
  }

  void check_harmonic(const GameState& state, std::int64_t i) {
    std::vector<BigInt> fills;
    fills.reserve(state.size());
    for (const Cup& c : state.cups()) fills.push_back(c.fill.units());
    std::sort(fills.begin(), fills.end(), std::greater<>());
    const auto n = static_cast<std::int64_t>(fills.size());
    if (n == 0) return;
    BigInt prefix = 0;
    std::int64_t next = 1;
    for (std::int64_t j = 1; j <= n; ++j) {
      prefix += fills[static_cast<std::size_t>(j - 1)];
      if (j != next && j != n) continue;
      if (j == next) next *= 2;
      count(Check::Harmonic);
      // av(j) <= 1 + H(n) - H(j), scaled by j D.
      Rational tail = harmonic(n);  // first: it may grow the table
      tail -= harmonic(j);
      const Rational bound = Rational(j * D_) * (1 + tail);
      if (Rational(prefix) > bound)
        fail(i, "harmonic-average-bound", "average of the fullest " + std::to_string(j) + " of " +
                                              std::to_string(n) + " cups exceeds 1 + 1/(j+1) + ... + 1/n");
    }
  }

  void check_potential(const GameState& state, std::int64_t i, const StepRecord& rec) {
    const auto& rm = rec.emptier.removals;
    if (static_cast<std::int64_t>(rm.size()) != p_) return;
    for (const Pour& r : rm)
      if (r.amount.units() != D_) return;
    count(Check::Potential);
    Rational change(0);
    for (const auto& [id, old] : before_) {
      change += phi_of_fill(to_water(state.cups()[id].fill, D_), eps_);
      change -= phi_of_fill(to_water(old, D_), eps_);
    }
    if (change > 0)
      fail(i, "potential-case1", "potential rose by " + format_rational(change) +
                                     " in a step that removed a full unit from each of p cups");
  }

  VerifyLevel level_;
  BigInt D_;
  Rational eps_;
  std::int64_t p_;
  bool dynamic_ = false;
  bool harmonic_ = false;
  bool potential_ = false;
  ThresholdCounterEmptier* threshold_ = nullptr;
  SmoothedGreedyEmptier* smoothed_ = nullptr;
  std::optional<WitnessTracker> witness_;
  WaterAmount three_;
  std::vector<WaterAmount> shadow_;  // by cup id
  std::vector<std::int64_t> stamp_;  // last step that touched each id
  std::size_t holding_ = 0;          // ledger entries with water
  BigInt total_ = 0;
  std::vector<CupId> touched_;
  std::vector<std::pair<CupId, WaterAmount>> before_;
  std::vector<Rational> h_{Rational(0)};
  std::array<std::int64_t, kChecks> counts_{};
};

TrialResult play_trial(const ExperimentSpec& spec, FillerStrategy& filler, std::uint64_t trial,
                       const InitialFills& initial) {
  const GameConfig& cfg = spec.config;
  TrialResult out;
  out.trial = trial;
  out.initial = initial;
  GameState state = new_game(cfg, initial);
  auto emptier = make_emptier(spec.emptier, cfg, {cfg.seed, trial}, {spec.counter_init});
  emptier->start(state);
  InvariantChecker checker(spec, state, *emptier);
  SummaryBuilder summary(cfg.resolution, spec.tail_levels, trial);
  const bool adaptive = filler.information_model() == InformationModel::Adaptive;
  auto snapshot = [&](std::int64_t i) {
    if (std::find(spec.checkpoints.begin(), spec.checkpoints.end(), i) != spec.checkpoints.end())
      out.checkpoints.push_back({i, std::vector<Cup>(state.cups().begin(), state.cups().end())});
  };
  snapshot(0);
  EmptierMove last;
  for (std::int64_t i = 1; i <= spec.steps; ++i) {
    FillerView view{i, &cfg, adaptive ? &state : nullptr, adaptive && i > 1 ? &last : nullptr};
    StepRecord rec;
    try {
      rec = play_step(state, filler.next_move(view), *emptier);
    } catch (const FillerMoveRejected& e) {
      throw StrategyProtocolError("filler " + filler.name() + " at step " + std::to_string(i) + ": " + e.what());
    }
    if (spec.record_phi) rec.phi = potential_phi(state, cfg.epsilon);
    checker.after_step(state, rec);
    summary.add(rec);
    snapshot(i);
    if (adaptive) last = rec.emptier;
    if (spec.keep_traces) out.trace.push_back(std::move(rec));
  }
  out.summary = summary.finish();
  out.checks = checker.counts();
  return out;
}

}  // namespace

TrialResult run_trial(const ExperimentSpec& spec, const FillerFactory& fillers, std::uint64_t trial) {
  auto filler = fillers.make({spec.config.seed, trial});
  return play_trial(spec, *filler, trial, setup_recovery(spec));
}

TrialResult run_trial(const ExperimentSpec& spec, std::uint64_t trial) {
  FillerFactory fillers(spec.filler, spec.config);
  return run_trial(spec, fillers, trial);
}

TrialResult replay_trial(const ExperimentSpec& spec, std::shared_ptr<const CompactTrace> moves, std::uint64_t trial,
                         const InitialFills& initial) {
  TraceFiller filler("trace", std::move(moves));
  return play_trial(spec, filler, trial, initial);
}

TrialResult replay_trial(const ExperimentSpec& spec, std::span<const FillerMove> moves, std::uint64_t trial,
                         const InitialFills& initial) {
  auto trace = std::make_shared<CompactTrace>();
  for (const FillerMove& m : moves) trace->append(m);
  return replay_trial(spec, std::move(trace), trial, initial);
}

// ---- experiments ------------------------------------------------------------

namespace {

struct Outcome {
  std::optional<TrialResult> result;
  std::optional<ViolationReport> violation;
  std::exception_ptr error;
};

Outcome guarded_trial(const ExperimentSpec& spec, const FillerFactory& fillers, std::uint64_t t) {
  Outcome o;
  try {
    o.result = run_trial(spec, fillers, t);
  } catch (const InvariantViolation& e) {
    o.violation = ViolationReport{t, e.step(), e.invariant(), e.what()};
  } catch (const StrategyProtocolError& e) {
    o.violation = ViolationReport{t, 0, "protocol", e.what()};
  } catch (...) {
    o.error = std::current_exception();
  }
  return o;
}

ExperimentResult aggregate(const ExperimentSpec& spec, std::vector<Outcome> outcomes, double seconds) {
  ExperimentResult res;
  res.spec = spec;
  res.wall_seconds = seconds;
  for (Outcome& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
    if (o.violation) res.violations.push_back(*o.violation);
    if (o.result) {
      for (const auto& [k, v] : o.result->checks) res.checks[k] += v;
      res.trials.push_back(std::move(*o.result));
    }
  }
  for (std::size_t k = 0; k < spec.tail_levels.size(); ++k) {
    std::int64_t final_hits = 0, step_hits = 0, steps = 0;
    for (const TrialResult& t : res.trials) {
      const auto& s = t.summary;
      if (s.final_backlog.units() * denominator(spec.tail_levels[k]) >
          numerator(spec.tail_levels[k]) * spec.config.resolution)
        ++final_hits;
      step_hits += s.tail_counts[k];
      steps += s.steps;
    }
    res.tails.push_back({spec.tail_levels[k], estimate_proportion(final_hits, static_cast<std::int64_t>(res.trials.size())),
                         estimate_proportion(step_hits, steps)});
  }
  return res;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  FillerFactory fillers(spec.filler, spec.config);
  std::vector<Outcome> outcomes(static_cast<std::size_t>(spec.trials));
  const int threads = spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t t = 0; t < spec.trials; ++t)
    outcomes[static_cast<std::size_t>(t)] = guarded_trial(spec, fillers, static_cast<std::uint64_t>(t));
  return aggregate(spec, std::move(outcomes), seconds_since(t0));
}

ExperimentResult run_experiment_serial(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  FillerFactory fillers(spec.filler, spec.config);
  std::vector<Outcome> outcomes;
  for (std::int64_t t = 0; t < spec.trials; ++t) outcomes.push_back(guarded_trial(spec, fillers, static_cast<std::uint64_t>(t)));
  return aggregate(spec, std::move(outcomes), seconds_since(t0));
}

}  // namespace cupgame
