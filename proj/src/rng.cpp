#include "cupgame/rng.hpp"

namespace cupgame {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(seed + kGolden);
  // Absorb the label bytewise, then its length as a separator.
  for (unsigned char c : label) h = splitmix64(h ^ (c + 0x100ULL));
  h = splitmix64(h ^ (label.size() * kGolden));
  for (std::uint64_t idx : indices) h = splitmix64(h + kGolden) ^ splitmix64(idx ^ 0x5851f42d4c957f2dULL);
  base_ = splitmix64(h ^ indices.size());
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return splitmix64(base_ + counter_ * kGolden);
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

BigInt RngStream::uniform_below(const BigInt& bound) {
  if (bound <= std::numeric_limits<std::uint64_t>::max()) return BigInt(uniform_below(bound.convert_to<std::uint64_t>()));
  const unsigned bits = msb(bound) + 1;
  const unsigned words = (bits + 63) / 64;
  const unsigned top_bits = bits - 64 * (words - 1);
  for (;;) {
    BigInt v = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t x = next_u64();
      if (w == 0 && top_bits < 64) x >>= (64 - top_bits);
      v <<= 64;
      v += x;
    }
    if (v < bound) return v;
  }
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

WaterAmount uniform_threshold(RngStream& stream, const BigInt& D) {
  BigInt k = stream.uniform_below(BigInt(D / 2));
  return WaterAmount(BigInt(2 * k + 1));
}

}  // namespace cupgame
