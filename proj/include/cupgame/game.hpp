#pragma once

#include "cupgame/core.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cupgame {

using CupId = std::uint64_t;

struct Cup {
  CupId id = 0;
  WaterAmount fill;
  WaterAmount poured;  // cumulative, including any initial fill
};

struct Pour {
  CupId cup = 0;
  WaterAmount amount;
  friend bool operator==(const Pour&, const Pour&) = default;
};

struct FillerMove {
  std::vector<Pour> pours;     // existing cups
  std::vector<Pour> new_cups;  // dynamic variants only; ids must be fresh
  friend bool operator==(const FillerMove&, const FillerMove&) = default;
};

struct EmptierMove {
  std::vector<Pour> removals;
  friend bool operator==(const EmptierMove&, const EmptierMove&) = default;
};

/// What a move may do in a given variant, in units.
struct VariantRules {
  WaterAmount pour_budget;
  std::optional<WaterAmount> pour_cap;
  std::int64_t max_cups_emptied = 1;
  std::optional<WaterAmount> removal_cap;  // unset for flushing variants
  bool flush = false;
  bool dynamic = false;
};

VariantRules rules_for(const GameConfig& cfg);

/// The variant's per-step pour budget as water (not units).
Rational pour_budget_water(const GameConfig& cfg);
/// The variant's per-cup pour cap as water, if any.
std::optional<Rational> pour_cap_water(const GameConfig& cfg);

using InitialFills = std::map<CupId, WaterAmount>;

class GameState {
 public:
  const GameConfig& config() const { return *config_; }
  const VariantRules& rules() const { return *rules_; }
  const BigInt& resolution() const { return config_->resolution; }
  std::int64_t step() const { return step_; }
  std::span<const Cup> cups() const { return cups_; }
  std::size_t size() const { return cups_.size(); }
  CupId next_id() const { return next_id_; }

  /// Index into cups() of the given id, if present.
  std::optional<std::size_t> index_of(CupId id) const;
  const Cup* find(CupId id) const;

 private:
  friend GameState new_game(GameConfig cfg, const InitialFills& initial);
  friend void apply_filler_move(GameState&, const FillerMove&);
  friend void apply_emptier_move(GameState&, const EmptierMove&);
  friend void finish_step(GameState&);

  std::shared_ptr<const GameConfig> config_;
  std::shared_ptr<const VariantRules> rules_;
  std::int64_t step_ = 0;
  std::vector<Cup> cups_;  // sorted by id
  CupId next_id_ = 0;
  bool dense_ = true;      // cups_[i].id == i
};

/// Throws ConfigError for invalid configs or fills.
GameState new_game(GameConfig cfg, const InitialFills& initial = {});

struct Violation {
  std::string constraint;
  std::string detail;
};

std::optional<Violation> validate_filler_move(const GameState& state, const FillerMove& move);
std::optional<Violation> validate_emptier_move(const GameState& state, const EmptierMove& move);

/// Maximum fill; zero when there are no cups.
WaterAmount backlog(const GameState& state);

// ---- strategies -------------------------------------------------------------

enum class InformationModel { Oblivious, Adaptive };

/// Per-step quantities a strategy can report alongside its move.
struct EmptierStepMetrics {
  std::int64_t surplus = 0;  // T_i
  WaterAmount counter_sum;
  std::optional<std::int64_t> virtual_integer_fill;
  std::optional<WaterAmount> virtual_backlog;
};

class EmptierStrategy {
 public:
  virtual ~EmptierStrategy() = default;
  virtual std::string name() const = 0;
  virtual bool randomized() const = 0;
  /// Called once with the step-0 state.
  virtual void start(const GameState&) {}
  /// Sees the post-pour state and the pours of this step.
  virtual EmptierMove respond(const GameState& post_pour, const FillerMove& pours) = 0;
  virtual EmptierStepMetrics step_metrics() const { return {}; }
};

/// Oblivious fillers get neither the state nor the emptier's last move.
struct FillerView {
  std::int64_t step = 1;  // the step about to be played
  const GameConfig* config = nullptr;
  const GameState* state = nullptr;
  const EmptierMove* last_emptier_move = nullptr;
};

class FillerStrategy {
 public:
  virtual ~FillerStrategy() = default;
  virtual std::string name() const = 0;
  virtual InformationModel information_model() const = 0;
  virtual FillerMove next_move(const FillerView& view) = 0;
};

// ---- stepping ---------------------------------------------------------------

struct StepRecord {
  std::int64_t step = 0;
  FillerMove filler;
  EmptierMove emptier;
  WaterAmount backlog;
  std::int64_t integer_fill = 0;
  std::int64_t surplus = 0;
  WaterAmount counter_sum;
  std::optional<double> phi;
  std::optional<std::int64_t> virtual_integer_fill;
  std::optional<WaterAmount> virtual_backlog;
};

/// In-place step: pour, ask the emptier, validate, remove, drop empty cups
/// in dynamic variants, advance the step counter.
/// Throws FillerMoveRejected for a bad filler move and StrategyProtocolError
/// for a bad emptier move.
StepRecord play_step(GameState& state, FillerMove move, EmptierStrategy& emptier);

/// Value form: the input state is left untouched.
std::pair<GameState, StepRecord> step(const GameState& state, FillerMove move, EmptierStrategy& emptier);

/// Lower-level pieces used by play_step and trace replay. They validate.
void apply_filler_move(GameState& state, const FillerMove& move);
void apply_emptier_move(GameState& state, const EmptierMove& move);
void finish_step(GameState& state);

class FillerMoveRejected : public Error {
 public:
  FillerMoveRejected(Violation v) : Error(v.constraint + ": " + v.detail), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

/// Parameters of the equivalent standard multi-processor game for a
/// renormalized game with (p, eps, delta). One renormalized unit equals
/// (1 + 2 delta) standard units.
struct StandardParameters {
  std::int64_t p = 0;
  Rational epsilon;
  Rational delta;
  Rational unit_scale;
};
StandardParameters renormalized_to_standard(std::int64_t p, const Rational& epsilon, const Rational& delta);

}  // namespace cupgame
