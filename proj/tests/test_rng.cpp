#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "levytree/rng.hpp"

using namespace levytree;

TEST_CASE("philox known-answer vectors", "[rng]") {
  // Published 4x32-10 vectors: zero, all-ones, and pi-digit inputs.
  const std::array<std::uint32_t, 4> zero_out =
      philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(zero_out == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                                 0xbc57ac4cu, 0x9b00dbd8u});

  const std::array<std::uint32_t, 4> ones_out =
      philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                 {0xffffffffu, 0xffffffffu});
  CHECK(ones_out == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                                 0xa20bc7c6u, 0x6d5451fdu});

  const std::array<std::uint32_t, 4> pi_out =
      philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                 {0xa4093822u, 0x299f31d0u});
  CHECK(pi_out == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                               0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and stage-separated", "[rng]") {
  Rng a(42, "tree", 7);
  Rng b(42, "tree", 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  Rng c(42, "marks", 7);
  Rng d(42, "tree", 8);
  Rng e(43, "tree", 7);
  Rng base(42, "tree", 7);
  bool all_equal_c = true;
  bool all_equal_d = true;
  bool all_equal_e = true;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t x = base.next_u64();
    all_equal_c = all_equal_c && (c.next_u64() == x);
    all_equal_d = all_equal_d && (d.next_u64() == x);
    all_equal_e = all_equal_e && (e.next_u64() == x);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
  CHECK_FALSE(all_equal_e);
}

TEST_CASE("draws made on one stream never move another", "[rng]") {
  Rng solo(9, "cuts-edges", 0);
  std::vector<std::uint64_t> expected(32);
  for (auto& x : expected) x = solo.next_u64();

  Rng interleaved(9, "cuts-edges", 0);
  Rng noise(9, "cuts-vertices", 0);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    noise.next_u64();
    noise.uniform();
    REQUIRE(interleaved.next_u64() == expected[i]);
  }
}

TEST_CASE("uniform variants respect their ranges", "[rng]") {
  Rng rng(123, "unit", 0);
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_pos();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("uniform_below is unbiased over a small range", "[rng]") {
  Rng rng(7, "unit", 1);
  constexpr std::uint64_t n = 6;
  constexpr int draws = 60000;
  std::array<int, n> counts{};
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t k = rng.uniform_below(n);
    REQUIRE(k < n);
    ++counts[std::size_t(k)];
  }
  // 4-sigma band around draws/n for a binomial count.
  const double mean = double(draws) / double(n);
  const double sd = std::sqrt(mean * (1.0 - 1.0 / double(n)));
  for (const int c : counts) {
    CHECK(std::abs(double(c) - mean) < 4.0 * sd);
  }
  CHECK_THROWS_AS(rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("exponential sampler hits its rate", "[rng]") {
  Rng rng(99, "unit", 2);
  CHECK(rng.exponential(0.0) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(rng.exponential(-1.0), std::invalid_argument);

  constexpr int draws = 100000;
  constexpr double rate = 2.5;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = rng.exponential(rate);
    REQUIRE(x > 0.0);
    sum += x;
  }
  const double mean = sum / draws;
  const double stderr_mean = (1.0 / rate) / std::sqrt(double(draws));
  CHECK(std::abs(mean - 1.0 / rate) < 4.0 * stderr_mean);
}
