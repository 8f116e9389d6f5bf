#include "cupgame/thresholds.hpp"

#include "cupgame/rng.hpp"

namespace cupgame {

ThresholdState::ThresholdState(std::size_t cups, BigInt D, const Rational& delta, OffsetSource source)
    : D_(std::move(D)), source_(std::move(source)), cups_(cups) {
  if (delta <= 0 || numerator(delta) != 1) throw ConfigError("delta: 1/delta must be a positive integer");
  const BigInt inv = denominator(delta);
  if (inv > 1'000'000'000) throw ConfigError("delta: 1/delta too large");
  period_ = inv.convert_to<std::int64_t>() + 1;
  increment_ = to_units(Rational(1) + delta, D_);
  delta_units_ = to_units(delta, D_);
}

ThresholdState::OffsetSource ThresholdState::seeded(std::uint64_t seed, std::uint64_t trial, BigInt D) {
  return [seed, trial, D = std::move(D)](std::size_t cup, std::int64_t t0) {
    RngStream s(seed, "threshold", {trial, static_cast<std::uint64_t>(cup), static_cast<std::uint64_t>(t0)});
    return uniform_threshold(s, D);
  };
}

const WaterAmount& ThresholdState::offset(std::size_t cup, std::int64_t collection) {
  auto& offs = cups_[cup].offsets;
  const auto c = static_cast<std::size_t>(collection);
  if (offs.size() <= c) offs.resize(c + 1);
  if (!offs[c]) {
    WaterAmount s = source_(cup, 1 + collection * period_);
    if (s.is_zero() || s.is_even() || s.units() >= D_) throw SetupError("threshold offset must be odd and inside (0, D)");
    offs[c] = std::move(s);
  }
  return *offs[c];
}

template <class Fn>
void ThresholdState::for_each_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi, Fn&& fn) {
  if (hi <= lo) return;
  const std::int64_t t_hi = whole_part(hi, D_);
  if (t_hi < 2) return;
  const std::int64_t t_lo = std::max<std::int64_t>(whole_part(lo, D_), 2);
  for (std::int64_t t = t_lo; t <= t_hi; ++t) {
    if (!is_threshold_index(t)) continue;
    WaterAmount v(BigInt(D_ * t));
    v += offset(cup, (t - 1) / period_);
    if (lo < v && v <= hi) fn(std::move(v));
  }
}

std::vector<WaterAmount> ThresholdState::threshold_values_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi) {
  std::vector<WaterAmount> out;
  for_each_in(cup, lo, hi, [&](WaterAmount v) { out.push_back(std::move(v)); });
  return out;
}

std::int64_t ThresholdState::count_in(std::size_t cup, const WaterAmount& lo, const WaterAmount& hi) {
  std::int64_t k = 0;
  for_each_in(cup, lo, hi, [&](WaterAmount) { ++k; });
  return k;
}

std::int64_t ThresholdState::record_pour(std::size_t cup, const WaterAmount& amount) {
  if (amount.is_zero()) return 0;
  CupThresholds& c = cups_[cup];
  WaterAmount next = c.poured + amount;
  const std::int64_t k = count_in(cup, c.poured, next);
  c.poured = std::move(next);
  if (k > 0) {
    c.crossings += k;
    for (std::int64_t i = 0; i < k; ++i) {
      c.counter += increment_;
      counter_sum_ += increment_;
    }
  }
  return k;
}

void ThresholdState::init_from_initial_fill(std::size_t cup, const WaterAmount& fill, CounterInit mode) {
  CupThresholds& c = cups_[cup];
  if (!c.poured.is_zero()) throw SetupError("counters initialised after pours");
  const std::int64_t k = count_in(cup, WaterAmount(), fill);
  c.poured = fill;
  c.crossings = k;
  const WaterAmount per = mode == CounterInit::Scaled ? increment_ : WaterAmount(D_);
  for (std::int64_t i = 0; i < k; ++i) {
    c.counter += per;
    counter_sum_ += per;
  }
}

void ThresholdState::decrement(std::size_t cup, const WaterAmount& amount) {
  cups_[cup].counter -= amount;
  counter_sum_ -= amount;
}

void ThresholdState::corrupt_counter(std::size_t cup, const WaterAmount& extra) {
  cups_[cup].counter += extra;
  counter_sum_ += extra;
}

std::int64_t surplus_of_step(std::int64_t crossings, std::int64_t p) { return crossings > p ? crossings - p : 0; }

}  // namespace cupgame
