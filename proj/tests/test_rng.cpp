#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "particle_limits/rng.hpp"

using namespace particle_limits;

TEST_CASE("philox known-answer vectors") {
  // Reference vectors for Philox4x32-10 from the Random123 test suite.
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                               {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are deterministic and address-separated") {
  RngStream a(42, 0, RngStream::Channel::dynamics);
  RngStream a_again(42, 0, RngStream::Channel::dynamics);
  RngStream other_replica(42, 1, RngStream::Channel::dynamics);
  RngStream other_channel(42, 0, RngStream::Channel::initial_condition);

  std::vector<std::uint32_t> seq_a, seq_b, seq_r, seq_c;
  for (int i = 0; i < 64; ++i) {
    seq_a.push_back(a.next_u32());
    seq_b.push_back(a_again.next_u32());
    seq_r.push_back(other_replica.next_u32());
    seq_c.push_back(other_channel.next_u32());
  }
  CHECK(seq_a == seq_b);
  CHECK(seq_a != seq_r);
  CHECK(seq_a != seq_c);
  CHECK(seq_r != seq_c);
}

TEST_CASE("uniform01 lies in [0,1) with the right moments") {
  RngStream rng(7, 0, RngStream::Channel::dynamics);
  const int samples = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / samples;
  const double var = sum_sq / samples - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.005);          // ~7 standard errors
  CHECK(std::abs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("exponential matches its first two moments") {
  RngStream rng(11, 3, RngStream::Channel::dynamics);
  const int samples = 200000;
  const double rate = 2.5;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = rng.exponential(rate);
    REQUIRE(x >= 0.0);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / samples;
  const double second = sum_sq / samples;
  CHECK(std::abs(mean - 1.0 / rate) < 0.01 / rate);
  CHECK(std::abs(second - 2.0 / (rate * rate)) < 0.05 / (rate * rate));
}

TEST_CASE("uniform_below is unbiased across its range") {
  RngStream rng(13, 0, RngStream::Channel::dynamics);
  const std::uint32_t n = 7;
  std::vector<int> counts(n, 0);
  const int samples = 140000;
  for (int i = 0; i < samples; ++i) counts[rng.uniform_below(n)]++;
  for (std::uint32_t k = 0; k < n; ++k) {
    // Binomial(140000, 1/7): sd ~ 130; allow 5 sigma.
    CHECK(std::abs(counts[k] - samples / double(n)) < 650);
  }
}

TEST_CASE("poisson moments across both sampling regimes") {
  for (const double mean : {0.3, 3.0, 25.0, 400.0, 12000.0}) {
    RngStream rng(17, static_cast<std::uint32_t>(mean), RngStream::Channel::dynamics);
    const int samples = 40000;
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t min_seen = 1 << 30;
    for (int i = 0; i < samples; ++i) {
      const std::int64_t k = rng.poisson(mean);
      min_seen = std::min(min_seen, k);
      sum += double(k);
      sum_sq += double(k) * double(k);
    }
    CHECK(min_seen >= 0);
    const double sample_mean = sum / samples;
    const double sample_var = sum_sq / samples - sample_mean * sample_mean;
    const double se_mean = std::sqrt(mean / samples);
    CHECK(std::abs(sample_mean - mean) < 6.0 * se_mean);
    CHECK(std::abs(sample_var - mean) < 0.05 * mean + 6.0 * mean / std::sqrt(samples));
  }
}

TEST_CASE("poisson of zero mean is identically zero") {
  RngStream rng(1, 0, RngStream::Channel::dynamics);
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
}
