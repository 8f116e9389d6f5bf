#pragma once

#include "cupgame/emptiers.hpp"
#include "cupgame/fillers.hpp"
#include "cupgame/game.hpp"
#include "cupgame/metrics.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cupgame {

enum class VerifyLevel { Off, Invariants, Full };
std::string_view verify_level_name(VerifyLevel v);
VerifyLevel parse_verify_level(std::string_view s);

enum class Placement { OneCup, Uniform };
std::string_view placement_name(Placement p);
Placement parse_placement(std::string_view s);

/// Water already in the cups before step 1.
struct RecoverySpec {
  Rational total;  // b, in water
  Placement placement = Placement::OneCup;
};

struct ExperimentSpec {
  GameConfig config;
  bool auto_resolution = true;  // D = lcm(default, what the filler and recovery need)
  StrategySpec filler;
  StrategySpec emptier;
  std::int64_t steps = 100;
  std::int64_t trials = 1;
  std::vector<std::int64_t> checkpoints;
  VerifyLevel verify = VerifyLevel::Invariants;
  std::optional<RecoverySpec> recovery;
  CounterInit counter_init = CounterInit::Scaled;
  std::vector<Rational> tail_levels{Rational(3)};
  bool record_phi = false;
  bool keep_traces = false;
  bool oblivious_only = false;
  int workers = 0;  // 0: OpenMP default
};

/// Fills in D and validates. Throws ConfigError or NonRepresentable.
ExperimentSpec resolve_spec(ExperimentSpec spec);

/// Places b per the recovery rule; empty without recovery.
InitialFills setup_recovery(const ExperimentSpec& spec);

struct Snapshot {
  std::int64_t step = 0;
  std::vector<Cup> cups;
};

struct ViolationReport {
  std::uint64_t trial = 0;
  std::int64_t step = 0;
  std::string invariant;
  std::string detail;
};

struct TrialResult {
  std::uint64_t trial = 0;
  InitialFills initial;
  std::vector<StepRecord> trace;  // only with keep_traces
  std::vector<Snapshot> checkpoints;
  TraceSummary summary;
  std::map<std::string, std::int64_t> checks;  // evaluations per invariant
};

struct TailEstimate {
  Rational level;
  ProportionEstimate final_step;  // Pr[backlog > level after the last step]
  ProportionEstimate any_step;    // fraction of all trial-steps above level
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<TrialResult> trials;
  std::vector<TailEstimate> tails;
  std::vector<ViolationReport> violations;  // empty for a passing run
  std::map<std::string, std::int64_t> checks;
  double wall_seconds = 0;
};

/// Throws InvariantViolation, StrategyProtocolError or FillerMoveRejected.
/// `spec` must already be resolved.
TrialResult run_trial(const ExperimentSpec& spec, const FillerFactory& fillers, std::uint64_t trial);
TrialResult run_trial(const ExperimentSpec& spec, std::uint64_t trial);

/// Trials in parallel with OpenMP; the result does not depend on the
/// worker count. Violations and protocol errors are collected per trial.
ExperimentResult run_experiment(const ExperimentSpec& spec);
/// Reference: same result, one trial after another.
ExperimentResult run_experiment_serial(const ExperimentSpec& spec);

/// Replays recorded filler moves against a fresh emptier, checking
/// invariants as run_trial does.
TrialResult replay_trial(const ExperimentSpec& spec, std::shared_ptr<const CompactTrace> moves, std::uint64_t trial,
                         const InitialFills& initial);
TrialResult replay_trial(const ExperimentSpec& spec, std::span<const FillerMove> moves, std::uint64_t trial,
                         const InitialFills& initial);

}  // namespace cupgame
