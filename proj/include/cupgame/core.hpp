#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cupgame {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// ---- errors ---------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonRepresentable : public Error {
 public:
  using Error::Error;
};

class NegativeWater : public Error {
 public:
  using Error::Error;
};

class SetupError : public Error {
 public:
  using Error::Error;
};

class StrategyProtocolError : public Error {
 public:
  using Error::Error;
};

/// A checked property failed. Carries the step and a short invariant name.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::int64_t step, std::string invariant, const std::string& detail)
      : Error("step " + std::to_string(step) + ": " + invariant + ": " + detail),
        step_(step),
        invariant_(std::move(invariant)) {}
  std::int64_t step() const noexcept { return step_; }
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::int64_t step_;
  std::string invariant_;
};

// ---- rationals --------------------------------------------------------------

/// Accepts "a/b", "a" or a finite decimal such as "0.3".
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& x);
BigInt numerator_of(const Rational& x);
BigInt denominator_of(const Rational& x);
double to_double(const Rational& x);

BigInt lcm_of(const BigInt& a, const BigInt& b);

// ---- water ------------------------------------------------------------------

/// Exact non-negative water quantity in resolution units (1 unit = 1/D).
class WaterAmount {
 public:
  WaterAmount() = default;
  explicit WaterAmount(BigInt units);
  explicit WaterAmount(std::int64_t units) : WaterAmount(BigInt(units)) {}

  const BigInt& units() const noexcept { return units_; }
  bool is_zero() const { return units_.is_zero(); }
  bool is_even() const { return !bit_test(units_, 0); }
  std::string str() const { return units_.str(); }

  WaterAmount& operator+=(const WaterAmount& o) {
    units_ += o.units_;
    return *this;
  }
  /// Throws NegativeWater when the result would be below zero.
  WaterAmount& operator-=(const WaterAmount& o);

  friend WaterAmount operator+(WaterAmount a, const WaterAmount& b) { return a += b; }
  friend WaterAmount operator-(WaterAmount a, const WaterAmount& b) { return a -= b; }
  friend bool operator==(const WaterAmount& a, const WaterAmount& b) { return a.units_ == b.units_; }
  friend std::strong_ordering operator<=>(const WaterAmount& a, const WaterAmount& b) {
    return a.units_.compare(b.units_) <=> 0;
  }

 private:
  BigInt units_;
};

/// x·D as a unit count.
WaterAmount to_units(const Rational& x, const BigInt& D);
Rational to_water(const WaterAmount& w, const BigInt& D);
double to_double(const WaterAmount& w, const BigInt& D);

/// floor(w / D), without a big division in the common case w < 8D.
std::int64_t whole_part(const WaterAmount& w, const BigInt& D);

// ---- configuration ----------------------------------------------------------

enum class VariantKind {
  SingleProcessor,
  MultiProcessor,
  RenormalizedMulti,
  DynamicSingle,
  DynamicMulti,
  CupFlushing,
  UniversalEmptying,
};

std::string_view variant_name(VariantKind k);
VariantKind parse_variant(std::string_view name);
bool is_dynamic(VariantKind k);
bool is_flushing(VariantKind k);

struct GameVariant {
  VariantKind kind = VariantKind::SingleProcessor;
  // Relaxed flushing: the flushed cup must be within this much of the fullest.
  std::optional<WaterAmount> flush_slack;
};

struct GameConfig {
  GameVariant variant;
  std::int64_t n = 1;
  std::int64_t p = 1;
  Rational epsilon{1, 4};
  Rational delta{0};
  BigInt resolution{8};  // D
  std::uint64_t seed = 0;

  VariantKind kind() const { return variant.kind; }
};

struct ConfigUse {
  bool threshold_emptier = false;
};

/// Empty when valid. Each entry names the offending field.
std::vector<std::string> validate_config(const GameConfig& cfg, const ConfigUse& use = {});

/// 2 * lcm(den eps, den delta, n^2, p).
BigInt default_resolution(const GameConfig& cfg);

}  // namespace cupgame
