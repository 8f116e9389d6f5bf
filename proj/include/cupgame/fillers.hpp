#pragma once

#include "cupgame/game.hpp"
#include "cupgame/rng.hpp"
#include "cupgame/strategy_spec.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cupgame {

/// Pours `budget` equally over `cups` (sorted ids). Throws NonRepresentable
/// unless each share is a positive even unit count.
FillerMove equal_split_move(std::span<const CupId> cups, const WaterAmount& budget);

/// Largest even unit count not above w.
WaterAmount even_floor(const WaterAmount& w);

/// A filler trace stored as runs of consecutive ids with equal pours.
class CompactTrace {
 public:
  void append(const FillerMove& move);
  FillerMove move(std::size_t index) const;
  std::size_t size() const { return steps_.size(); }

 private:
  struct Run {
    CupId first = 0;
    std::uint64_t count = 0;
    WaterAmount amount;
  };
  struct Step {
    std::vector<Run> pours;
    std::vector<Run> fresh;
  };
  static void encode(const std::vector<Pour>& in, std::vector<Run>& out);
  static void decode(const std::vector<Run>& in, std::vector<Pour>& out);
  std::vector<Step> steps_;
};

/// Pours over the cups the emptier has never removed water from. In the
/// universal game it pours p/2 per step and stops after step n/p - 1. In
/// other fixed-cup variants it starts a new round whenever the set runs out
/// or a share would exceed the per-cup cap. In dynamic variants it adds
/// `new_cups` fresh cups per step up to `max_cups`.
class AdaptiveHarmonicFiller final : public FillerStrategy {
 public:
  AdaptiveHarmonicFiller(const GameConfig& cfg, const Rational& budget_fraction, std::int64_t new_cups,
                         std::int64_t max_cups);
  std::string name() const override { return "adaptive_harmonic"; }
  InformationModel information_model() const override { return InformationModel::Adaptive; }
  FillerMove next_move(const FillerView& view) override;

  std::span<const CupId> untouched() const { return untouched_; }

 private:
  VariantKind kind_;
  std::int64_t last_step_;  // universal game only
  WaterAmount budget_;
  std::optional<WaterAmount> cap_;
  std::int64_t new_cups_;
  std::int64_t max_cups_;
  std::vector<CupId> untouched_;
  bool started_ = false;
};

/// Runs the harmonic construction on cups 0..k-1 without observing the
/// emptier: after each pour it guesses a uniform p-subset of the current
/// candidates as the cups just flushed and drops them.
class ObliviousGuessingFiller final : public FillerStrategy {
 public:
  ObliviousGuessingFiller(const GameConfig& cfg, std::int64_t k, StreamContext ctx);
  std::string name() const override { return "oblivious_guessing"; }
  InformationModel information_model() const override { return InformationModel::Oblivious; }
  FillerMove next_move(const FillerView& view) override;

  const std::vector<std::vector<CupId>>& guesses() const { return guesses_; }

 private:
  std::int64_t p_;
  std::int64_t last_step_;
  WaterAmount budget_;
  RngStream rng_;
  std::vector<CupId> candidates_;
  std::vector<std::vector<CupId>> guesses_;
};

/// Spends the budget in random even chunks over random cups with room.
class UniformRandomFiller final : public FillerStrategy {
 public:
  UniformRandomFiller(const GameConfig& cfg, const Rational& budget_fraction, StreamContext ctx, std::int64_t new_cups,
                      std::int64_t max_cups);
  std::string name() const override { return "uniform_random"; }
  InformationModel information_model() const override {
    return dynamic_ ? InformationModel::Adaptive : InformationModel::Oblivious;
  }
  FillerMove next_move(const FillerView& view) override;

 private:
  bool dynamic_;
  std::int64_t n_;
  WaterAmount budget_;
  WaterAmount cap_;
  RngStream rng_;
  std::int64_t new_cups_;
  std::int64_t max_cups_;
};

/// Pours min(cap, budget) into one cup every step.
class SingleTargetFiller final : public FillerStrategy {
 public:
  SingleTargetFiller(const GameConfig& cfg, const Rational& budget_fraction, CupId target);
  std::string name() const override { return "single_target"; }
  InformationModel information_model() const override { return InformationModel::Oblivious; }
  FillerMove next_move(const FillerView& view) override;

 private:
  CupId target_;
  WaterAmount amount_;
};

/// Pours cap-sized chunks into cups 0..width-1 in cyclic order.
class RoundRobinFiller final : public FillerStrategy {
 public:
  RoundRobinFiller(const GameConfig& cfg, const Rational& budget_fraction, std::int64_t width);
  std::string name() const override { return "round_robin"; }
  InformationModel information_model() const override { return InformationModel::Oblivious; }
  FillerMove next_move(const FillerView& view) override;

 private:
  std::int64_t width_;
  WaterAmount budget_;
  WaterAmount chunk_;
  std::int64_t cursor_ = 0;
};

/// Replays a fixed sequence of moves; empty moves after the end.
class TraceFiller final : public FillerStrategy {
 public:
  TraceFiller(std::string name, std::shared_ptr<const CompactTrace> trace)
      : name_(std::move(name)), trace_(std::move(trace)) {}
  std::string name() const override { return name_; }
  InformationModel information_model() const override { return InformationModel::Oblivious; }
  FillerMove next_move(const FillerView& view) override;

 private:
  std::string name_;
  std::shared_ptr<const CompactTrace> trace_;
};

/// Plays the adaptive harmonic filler offline in the universal game with
/// the same n, p and D against a deterministic emptier and records it.
std::shared_ptr<const CompactTrace> simulate_adaptive_trace(const GameConfig& cfg, const StrategySpec& target);

// ---- registry ---------------------------------------------------------------

std::vector<std::string> filler_names();
bool filler_is_adaptive(const StrategySpec& spec, const GameConfig& cfg);

/// D must be a multiple of this for the filler's equal splits to be exact.
BigInt filler_resolution_divisor(const StrategySpec& spec, const GameConfig& cfg);

/// Builds fillers for one experiment. Expensive preparation (offline
/// simulation, trace loading) happens once in the constructor.
class FillerFactory {
 public:
  FillerFactory(StrategySpec spec, GameConfig cfg);
  std::unique_ptr<FillerStrategy> make(StreamContext ctx) const;
  InformationModel information_model() const { return model_; }
  const StrategySpec& spec() const { return spec_; }

 private:
  StrategySpec spec_;
  GameConfig cfg_;
  InformationModel model_;
  std::shared_ptr<const CompactTrace> trace_;
};

}  // namespace cupgame
