#pragma once

#include "cupgame/core.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace cupgame {

/// How recovery mode seeds counters from an initial fill.
enum class CounterInit {
  Scaled,   // (1 + delta) per threshold already crossed
  Literal,  // 1 per threshold already crossed
};

/// Threshold collections and counters for the randomized renormalized
/// emptier. A collection starts at every t0 = 1 (mod P), P = 1/delta + 1,
/// and places thresholds at t0 + m + s(t0) for m = 1..1/delta. Values are in
/// units; offsets s are odd so they never meet an even cumulative pour.
class ThresholdState {
 public:
  /// Offset for (cup, t0) in odd units inside (0, D).
  using OffsetSource = std::function<WaterAmount(std::size_t cup, std::int64_t t0)>;

  ThresholdState(std::size_t cups, BigInt D, const Rational& delta, OffsetSource source);

  /// Offsets drawn from the stream (seed, "threshold", (trial, cup, t0)).
  static OffsetSource seeded(std::uint64_t seed, std::uint64_t trial, BigInt D);

  std::size_t size() const { return cups_.size(); }
  std::int64_t period() const { return period_; }
  const BigInt& resolution() const { return D_; }
  /// (1 + delta) in units.
  const WaterAmount& increment() const { return increment_; }
  /// delta in units.
  const WaterAmount& delta_units() const { return delta_units_; }

  /// All thresholds r with lo < r <= hi, ascending.
  std::vector<WaterAmount> threshold_values_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi);
  std::int64_t count_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi);

  /// Advances the cumulative pour and adds (1 + delta) per crossing.
  std::int64_t record_pour(std::size_t cup, const WaterAmount& amount);

  /// Sets the cumulative pour to the initial fill and the counter from the
  /// thresholds it already passed. Must run before any pour.
  void init_from_initial_fill(std::size_t cup, const WaterAmount& fill, CounterInit mode = CounterInit::Scaled);

  /// Removes from a counter (the emptier's decrement).
  void decrement(std::size_t cup, const WaterAmount& amount);

  const WaterAmount& counter(std::size_t cup) const { return cups_[cup].counter; }
  const WaterAmount& cumulative(std::size_t cup) const { return cups_[cup].poured; }
  std::int64_t crossings(std::size_t cup) const { return cups_[cup].crossings; }
  const WaterAmount& counter_sum() const { return counter_sum_; }

  /// Test hook: shifts a counter without touching water.
  void corrupt_counter(std::size_t cup, const WaterAmount& extra);

 private:
  struct CupThresholds {
    WaterAmount poured;
    WaterAmount counter;
    std::int64_t crossings = 0;
    std::vector<std::optional<WaterAmount>> offsets;  // by collection index
  };

  const WaterAmount& offset(std::size_t cup, std::int64_t collection);
  template <class Fn>
  void for_each_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi, Fn&& fn);
  bool is_threshold_index(std::int64_t t) const { return t >= 2 && (t - 1) % period_ != 0; }

  BigInt D_;
  std::int64_t period_;
  WaterAmount increment_;
  WaterAmount delta_units_;
  OffsetSource source_;
  std::vector<CupThresholds> cups_;
  WaterAmount counter_sum_;
};

/// T_i = max(0, k - p).
std::int64_t surplus_of_step(std::int64_t crossings, std::int64_t p);

}  // namespace cupgame
