#pragma once

#include "cupgame/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace cupgame {

/// Counter-based stream keyed by (seed, label, indices).
/// Output k is splitmix64(base + (k + 1) * golden), so a key fixes the whole sequence.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::string_view label, std::initializer_list<std::uint64_t> indices = {});

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  BigInt uniform_below(const BigInt& bound);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  std::uint64_t base() const { return base_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Odd unit count drawn uniformly from {1, 3, ..., D-1}.
WaterAmount uniform_threshold(RngStream& stream, const BigInt& D);

}  // namespace cupgame
