#pragma once

#include "cupgame/game.hpp"
#include "cupgame/strategy_spec.hpp"
#include "cupgame/thresholds.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cupgame {

// ---- move rules -------------------------------------------------------------

/// Removal for one cup under the variant: its whole fill when flushing,
/// otherwise min(cap, fill).
WaterAmount greedy_removal(const GameState& state, const Cup& cup);

/// min(1, fill) from the fullest cup, lowest id on ties.
EmptierMove greedy_single_move(const GameState& state);

/// The k fullest nonempty cups (lowest id on ties), each losing greedy_removal.
EmptierMove greedy_multi_move(const GameState& state, std::int64_t k);

/// Works on virtual fills (one per cup, same order as state.cups()).
/// Returns the chosen index or nothing when every virtual fill is below one.
std::optional<std::size_t> smoothed_greedy_choice(std::span<const WaterAmount> virtual_fills, const BigInt& D);

/// slack 0 flushes the fullest cup; otherwise the lowest-id cup within
/// slack of the fullest.
EmptierMove flush_greedy_move(const GameState& state, const WaterAmount& slack);

enum class TieRule { Arbitrary, Fullest };

/// Selects up to p+1 cups with nonzero counters, those at or above
/// (1 + delta) first, and removes min(1 + 2 delta, w) from each.
/// `active` lists cups that may have nonzero counters.
EmptierMove threshold_counter_move(const GameState& state, ThresholdState& thresholds, std::int64_t p, TieRule tie,
                                   std::span<const std::size_t> active);

// ---- strategies -------------------------------------------------------------

class GreedyEmptier final : public EmptierStrategy {
 public:
  GreedyEmptier(std::string name, std::int64_t cups_per_step) : name_(std::move(name)), k_(cups_per_step) {}
  std::string name() const override { return name_; }
  bool randomized() const override { return false; }
  EmptierMove respond(const GameState& s, const FillerMove&) override { return greedy_multi_move(s, k_); }

 private:
  std::string name_;
  std::int64_t k_;
};

class SmoothedGreedyEmptier final : public EmptierStrategy {
 public:
  SmoothedGreedyEmptier(StreamContext ctx) : ctx_(ctx) {}
  std::string name() const override { return "smoothed_greedy"; }
  bool randomized() const override { return true; }
  void start(const GameState& s) override;
  EmptierMove respond(const GameState& s, const FillerMove& pours) override;
  EmptierStepMetrics step_metrics() const override;

  std::span<const WaterAmount> virtual_fills() const { return virtual_; }
  std::span<const WaterAmount> offsets() const { return offsets_; }
  const BigInt& resolution() const { return D_; }

 private:
  StreamContext ctx_;
  BigInt D_;
  std::vector<WaterAmount> offsets_;
  std::vector<WaterAmount> virtual_;
};

class ThresholdCounterEmptier final : public EmptierStrategy {
 public:
  enum class Fault { None, CounterDrift };

  ThresholdCounterEmptier(const GameConfig& cfg, StreamContext ctx, TieRule tie, CounterInit init,
                          Fault fault = Fault::None);
  ThresholdCounterEmptier(const GameConfig& cfg, ThresholdState::OffsetSource offsets, TieRule tie,
                          CounterInit init = CounterInit::Scaled);
  std::string name() const override { return tie_ == TieRule::Fullest ? "smoothed_greedy_multi" : "threshold_counter"; }
  bool randomized() const override { return true; }
  void start(const GameState& s) override;
  EmptierMove respond(const GameState& s, const FillerMove& pours) override;
  EmptierStepMetrics step_metrics() const override;

  const ThresholdState& thresholds() const { return thresholds_; }
  CounterInit counter_init() const { return init_; }
  std::int64_t last_crossings() const { return last_crossings_; }

 private:
  void track(std::size_t cup);

  std::int64_t p_;
  TieRule tie_;
  CounterInit init_;
  Fault fault_;
  ThresholdState thresholds_;
  std::vector<std::size_t> active_;
  std::vector<char> in_active_;
  std::int64_t last_crossings_ = 0;
  std::int64_t last_surplus_ = 0;
  std::int64_t steps_ = 0;
};

class FlushEmptier final : public EmptierStrategy {
 public:
  explicit FlushEmptier(WaterAmount slack) : slack_(std::move(slack)) {}
  std::string name() const override { return slack_.is_zero() ? "flush_greedy" : "flush_relaxed"; }
  bool randomized() const override { return false; }
  EmptierMove respond(const GameState& s, const FillerMove&) override { return flush_greedy_move(s, slack_); }

 private:
  WaterAmount slack_;
};

class NullEmptier final : public EmptierStrategy {
 public:
  std::string name() const override { return "null"; }
  bool randomized() const override { return false; }
  EmptierMove respond(const GameState&, const FillerMove&) override { return {}; }
};

// ---- registry ---------------------------------------------------------------

struct EmptierOptions {
  CounterInit counter_init = CounterInit::Scaled;
};

std::vector<std::string> emptier_names();
bool emptier_is_randomized(const std::string& name);
bool emptier_uses_thresholds(const std::string& name);
/// Throws ConfigError for unknown names, bad parameters or a variant the
/// strategy does not play.
std::unique_ptr<EmptierStrategy> make_emptier(const StrategySpec& spec, const GameConfig& cfg, StreamContext ctx,
                                              const EmptierOptions& opts = {});

}  // namespace cupgame
