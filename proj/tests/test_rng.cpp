#include <doctest.h>

#include "cupgame/rng.hpp"

#include <map>
#include <set>

using namespace cupgame;

TEST_CASE("splitmix64 matches the reference generator") {
  // First outputs of the reference SplitMix64 seeded with 0.
  CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(2 * 0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("a key fixes the stream and different keys differ") {
  RngStream a(7, "filler", {1, 2}), b(7, "filler", {1, 2});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  std::set<std::uint64_t> firsts;
  firsts.insert(RngStream(7, "filler", {1, 2}).next_u64());
  firsts.insert(RngStream(8, "filler", {1, 2}).next_u64());
  firsts.insert(RngStream(7, "emptier", {1, 2}).next_u64());
  firsts.insert(RngStream(7, "filler", {2, 1}).next_u64());
  firsts.insert(RngStream(7, "filler", {1}).next_u64());
  firsts.insert(RngStream(7, "filler", {1, 2, 0}).next_u64());
  CHECK(firsts.size() == 6);
}

TEST_CASE("uniform_below stays in range and covers it evenly") {
  RngStream r(1, "range");
  std::map<std::uint64_t, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const auto v = r.uniform_below(std::uint64_t{6});
    REQUIRE(v < 6);
    ++counts[v];
  }
  for (auto& [v, c] : counts) CHECK(std::abs(c - draws / 6) < 500);  // about 5 sigma
}

TEST_CASE("big bounds draw below the bound and reach the top word") {
  RngStream r(2, "big");
  const BigInt bound = (BigInt(1) << 200) + 12345;
  bool high = false;
  for (int i = 0; i < 200; ++i) {
    const BigInt v = r.uniform_below(bound);
    REQUIRE(v >= 0);
    REQUIRE(v < bound);
    high = high || v > (BigInt(1) << 199);
  }
  CHECK(high);
  // Small BigInt bounds use the same draws as the machine-word path.
  RngStream x(5, "same"), y(5, "same");
  for (int i = 0; i < 50; ++i) CHECK(BigInt(x.uniform_below(std::uint64_t{1000})) == y.uniform_below(BigInt(1000)));
}

TEST_CASE("uniform_threshold is odd and inside (0, D)") {
  RngStream r(3, "thr");
  const BigInt D = 20;
  std::set<BigInt> seen;
  for (int i = 0; i < 2000; ++i) {
    const WaterAmount t = uniform_threshold(r, D);
    CHECK_FALSE(t.is_even());
    CHECK(t.units() > 0);
    CHECK(t.units() < D);
    seen.insert(t.units());
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("uniform01 mean is about one half") {
  RngStream r(9, "u01");
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}
