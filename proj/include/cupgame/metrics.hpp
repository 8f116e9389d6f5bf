#pragma once

#include "cupgame/game.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace cupgame {

/// Sum of floor(f_j) over the cups.
std::int64_t integer_fill(const GameState& state);
std::int64_t integer_fill(std::span<const WaterAmount> fills, const BigInt& D);

/// Integral of (1 + eps)^ceil(x) from 0 to f, for one fill f (in water).
Rational phi_of_fill(const Rational& f, const Rational& eps);

/// Sum of phi_of_fill over the cups, exactly.
Rational potential_phi_exact(const GameState& state, const Rational& eps);
Rational potential_phi_exact(std::span<const WaterAmount> fills, const BigInt& D, const Rational& eps);
double potential_phi(const GameState& state, const Rational& eps);
double potential_phi(std::span<const WaterAmount> fills, const BigInt& D, const Rational& eps);

/// Mean of the j largest fills, in units. Missing cups count as empty.
Rational avg_top(const GameState& state, std::int64_t j);
Rational avg_top(std::span<const WaterAmount> fills, std::int64_t j);

/// 1/(j+1) + ... + 1/n; zero when j >= n.
Rational harmonic_tail(std::int64_t j, std::int64_t n);

/// Fill of the last untouched cup in the universal game after the adaptive
/// harmonic filler's n/p - 1 steps: the sum of 1/(2j) for j = 2..n/p.
Rational universal_lower_bound(std::int64_t n, std::int64_t p);

/// Smallest l in 1..i with 2 (T_{i-l+1} + ... + T_i) >= delta l + t, where
/// surplus holds T_1..T_i.
std::optional<std::int64_t> backlog_witness_exists(std::span<const std::int64_t> surplus, const Rational& t,
                                                   const Rational& delta);

/// Height-0 witness detection in O(1) per step. Let G(i) be the scaled
/// prefix sum of (2 T_m - delta); a witness for step i exists exactly when
/// G(i) >= min over k < i of G(k).
class WitnessTracker {
 public:
  explicit WitnessTracker(const Rational& delta);
  /// Appends T_i and returns whether step i has a witness.
  bool push(std::int64_t surplus);
  std::int64_t steps() const { return steps_; }

 private:
  BigInt num_;
  BigInt den_;
  BigInt g_ = 0;
  BigInt min_prefix_ = 0;
  std::int64_t steps_ = 0;
};

// ---- summaries --------------------------------------------------------------

struct TraceSummary {
  std::uint64_t trial = 0;
  std::int64_t steps = 0;
  WaterAmount max_backlog;
  WaterAmount final_backlog;
  double median_backlog = 0;  // in water
  double p90_backlog = 0;
  double p99_backlog = 0;
  std::vector<Rational> tail_levels;
  std::vector<std::int64_t> tail_counts;  // steps with backlog > level
  std::int64_t surplus_total = 0;         // sum of T_m
  WaterAmount max_counter_sum;
  std::optional<double> phi_min;
  std::optional<double> phi_max;
  std::optional<std::int64_t> first_zero_integer_fill;
  std::optional<std::int64_t> first_zero_virtual_integer_fill;

  double tail_fraction(std::size_t level) const;
};

/// Accumulates a TraceSummary one step at a time.
class SummaryBuilder {
 public:
  SummaryBuilder(BigInt D, std::vector<Rational> tail_levels, std::uint64_t trial = 0);
  void add(const StepRecord& rec);
  TraceSummary finish() const;

 private:
  BigInt D_;
  TraceSummary s_;
  std::vector<BigInt> tail_nums_;  // level * D as numerator / denominator
  std::vector<BigInt> tail_dens_;
  std::vector<double> backlogs_;
};

TraceSummary summarize(std::span<const StepRecord> trace, const BigInt& D, std::vector<Rational> tail_levels,
                       std::uint64_t trial = 0);

struct ProportionEstimate {
  double value = 0;
  double standard_error = 0;
};
/// Binomial estimate: successes / trials with sqrt(p (1 - p) / trials).
ProportionEstimate estimate_proportion(std::int64_t successes, std::int64_t trials);

/// One row per summary, with a header naming every column.
void write_summary_csv(std::ostream& out, std::span<const TraceSummary> summaries, const BigInt& D);

}  // namespace cupgame
