#include "cupgame/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cupgame {

std::int64_t integer_fill(std::span<const WaterAmount> fills, const BigInt& D) {
  std::int64_t total = 0;
  for (const WaterAmount& f : fills) total += whole_part(f, D);
  return total;
}

std::int64_t integer_fill(const GameState& state) {
  std::int64_t total = 0;
  for (const Cup& c : state.cups()) total += whole_part(c.fill, state.resolution());
  return total;
}

namespace {

std::vector<WaterAmount> fills_of(const GameState& state) {
  std::vector<WaterAmount> out;
  out.reserve(state.size());
  for (const Cup& c : state.cups()) out.push_back(c.fill);
  return out;
}

// geometric[k] = q + q^2 + ... + q^k, powers[k] = q^k
struct PowerTable {
  Rational q;
  std::vector<Rational> powers{Rational(1)};
  std::vector<Rational> geometric{Rational(0)};
  void extend(std::int64_t k) {
    while (static_cast<std::int64_t>(powers.size()) <= k + 1) {
      powers.push_back(powers.back() * q);
      geometric.push_back(geometric.back() + powers[geometric.size()]);
    }
  }
};

}  // namespace

Rational phi_of_fill(const Rational& f, const Rational& eps) {
  if (f <= 0) return Rational(0);
  const BigInt k = numerator(f) / denominator(f);
  const Rational q = 1 + eps;
  Rational power(1), sum(0);
  for (BigInt m = 1; m <= k; ++m) {
    power *= q;
    sum += power;
  }
  return sum + (f - Rational(k)) * power * q;
}

Rational potential_phi_exact(std::span<const WaterAmount> fills, const BigInt& D, const Rational& eps) {
  PowerTable t{1 + eps};
  Rational total(0);
  for (const WaterAmount& f : fills) {
    if (f.is_zero()) continue;
    const std::int64_t k = whole_part(f, D);
    t.extend(k);
    total += t.geometric[static_cast<std::size_t>(k)];
    const BigInt rest = f.units() - BigInt(k) * D;
    if (!rest.is_zero()) total += Rational(rest, D) * t.powers[static_cast<std::size_t>(k + 1)];
  }
  return total;
}

Rational potential_phi_exact(const GameState& state, const Rational& eps) {
  auto fills = fills_of(state);
  return potential_phi_exact(fills, state.resolution(), eps);
}

double potential_phi(std::span<const WaterAmount> fills, const BigInt& D, const Rational& eps) {
  const double q = 1.0 + to_double(eps);
  double total = 0;
  for (const WaterAmount& f : fills) {
    if (f.is_zero()) continue;
    const std::int64_t k = whole_part(f, D);
    const double frac = to_double(WaterAmount(BigInt(f.units() - BigInt(k) * D)), D);
    const double qk = std::pow(q, static_cast<double>(k));
    total += q * (qk - 1.0) / (q - 1.0) + frac * qk * q;
  }
  return total;
}

double potential_phi(const GameState& state, const Rational& eps) {
  auto fills = fills_of(state);
  return potential_phi(fills, state.resolution(), eps);
}

Rational avg_top(std::span<const WaterAmount> fills, std::int64_t j) {
  if (j < 1) throw ConfigError("avg_top: j must be at least 1");
  std::vector<WaterAmount> sorted(fills.begin(), fills.end());
  const auto take = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(j));
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take), sorted.end(),
                    std::greater<>());
  BigInt sum = 0;
  for (std::size_t i = 0; i < take; ++i) sum += sorted[i].units();
  return Rational(sum, BigInt(j));
}

Rational avg_top(const GameState& state, std::int64_t j) {
  auto fills = fills_of(state);
  return avg_top(fills, j);
}

Rational harmonic_tail(std::int64_t j, std::int64_t n) {
  Rational sum(0);
  for (std::int64_t k = j + 1; k <= n; ++k) sum += Rational(1, k);
  return sum;
}

Rational universal_lower_bound(std::int64_t n, std::int64_t p) {
  if (p < 1 || n % p != 0) throw ConfigError("universal_lower_bound: n must be a multiple of p");
  Rational sum(0);
  for (std::int64_t j = 2; j <= n / p; ++j) sum += Rational(1, 2 * j);
  return sum;
}

std::optional<std::int64_t> backlog_witness_exists(std::span<const std::int64_t> surplus, const Rational& t,
                                                   const Rational& delta) {
  Rational window(0);
  const auto i = static_cast<std::int64_t>(surplus.size());
  for (std::int64_t l = 1; l <= i; ++l) {
    window += surplus[static_cast<std::size_t>(i - l)];
    if (2 * window >= delta * l + t) return l;
  }
  return std::nullopt;
}

WitnessTracker::WitnessTracker(const Rational& delta) : num_(numerator(delta)), den_(denominator(delta)) {}

bool WitnessTracker::push(std::int64_t surplus) {
  // min_prefix_ covers G(0..i-1) before the update.
  if (steps_ > 0) min_prefix_ = std::min(min_prefix_, g_);
  g_ += 2 * BigInt(surplus) * den_ - num_;
  ++steps_;
  return g_ >= min_prefix_;
}

// ---- summaries --------------------------------------------------------------

double TraceSummary::tail_fraction(std::size_t level) const {
  return steps == 0 ? 0.0 : static_cast<double>(tail_counts.at(level)) / static_cast<double>(steps);
}

SummaryBuilder::SummaryBuilder(BigInt D, std::vector<Rational> tail_levels, std::uint64_t trial) : D_(std::move(D)) {
  s_.trial = trial;
  s_.tail_levels = std::move(tail_levels);
  s_.tail_counts.assign(s_.tail_levels.size(), 0);
  for (const Rational& c : s_.tail_levels) {
    tail_nums_.push_back(numerator(c) * D_);
    tail_dens_.push_back(denominator(c));
  }
}

void SummaryBuilder::add(const StepRecord& rec) {
  ++s_.steps;
  if (rec.backlog > s_.max_backlog) s_.max_backlog = rec.backlog;
  s_.final_backlog = rec.backlog;
  backlogs_.push_back(to_double(rec.backlog, D_));
  for (std::size_t k = 0; k < tail_nums_.size(); ++k)
    if (rec.backlog.units() * tail_dens_[k] > tail_nums_[k]) ++s_.tail_counts[k];
  s_.surplus_total += rec.surplus;
  if (rec.counter_sum > s_.max_counter_sum) s_.max_counter_sum = rec.counter_sum;
  if (rec.phi) {
    s_.phi_min = s_.phi_min ? std::min(*s_.phi_min, *rec.phi) : *rec.phi;
    s_.phi_max = s_.phi_max ? std::max(*s_.phi_max, *rec.phi) : *rec.phi;
  }
  if (!s_.first_zero_integer_fill && rec.integer_fill == 0) s_.first_zero_integer_fill = rec.step;
  if (!s_.first_zero_virtual_integer_fill && rec.virtual_integer_fill && *rec.virtual_integer_fill == 0)
    s_.first_zero_virtual_integer_fill = rec.step;
}

namespace {

// Nearest-rank quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

TraceSummary SummaryBuilder::finish() const {
  TraceSummary out = s_;
  std::vector<double> sorted = backlogs_;
  std::sort(sorted.begin(), sorted.end());
  out.median_backlog = quantile(sorted, 0.5);
  out.p90_backlog = quantile(sorted, 0.9);
  out.p99_backlog = quantile(sorted, 0.99);
  return out;
}

TraceSummary summarize(std::span<const StepRecord> trace, const BigInt& D, std::vector<Rational> tail_levels,
                       std::uint64_t trial) {
  SummaryBuilder b(D, std::move(tail_levels), trial);
  for (const StepRecord& r : trace) b.add(r);
  return b.finish();
}

ProportionEstimate estimate_proportion(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) return {};
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(trials))};
}

void write_summary_csv(std::ostream& out, std::span<const TraceSummary> summaries, const BigInt& D) {
  out << "trial,steps,max_backlog,max_backlog_units,final_backlog,median_backlog,p90_backlog,p99_backlog";
  const std::vector<Rational> none;
  const auto& levels = summaries.empty() ? none : summaries.front().tail_levels;
  for (const Rational& c : levels) out << ",frac_backlog_gt_" << format_rational(c);
  out << ",surplus_total,max_counter_sum,phi_min,phi_max,first_zero_integer_fill,first_zero_virtual_integer_fill\n";
  auto opt = [&](const auto& v) {
    if (v) out << *v;
  };
  for (const TraceSummary& s : summaries) {
    out << s.trial << ',' << s.steps << ',' << to_double(s.max_backlog, D) << ',' << s.max_backlog.str() << ','
        << to_double(s.final_backlog, D) << ',' << s.median_backlog << ',' << s.p90_backlog << ',' << s.p99_backlog;
    for (std::size_t k = 0; k < s.tail_counts.size(); ++k) out << ',' << s.tail_fraction(k);
    out << ',' << s.surplus_total << ',' << to_double(s.max_counter_sum, D) << ',';
    opt(s.phi_min);
    out << ',';
    opt(s.phi_max);
    out << ',';
    opt(s.first_zero_integer_fill);
    out << ',';
    opt(s.first_zero_virtual_integer_fill);
    out << '\n';
  }
}

}  // namespace cupgame
