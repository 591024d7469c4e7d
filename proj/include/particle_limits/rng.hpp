#ifndef PARTICLE_LIMITS_RNG_HPP
#define PARTICLE_LIMITS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace particle_limits {

/// One application of Philox4x32 with 10 rounds; exposed for verification.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t product0 = std::uint64_t(kMul0) * counter[0];
    const std::uint64_t product1 = std::uint64_t(kMul1) * counter[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(product1 >> 32) ^ counter[1] ^ key[0],
        static_cast<std::uint32_t>(product1),
        static_cast<std::uint32_t>(product0 >> 32) ^ counter[3] ^ key[1],
        static_cast<std::uint32_t>(product0),
    };
    counter = next;
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

/// Counter-based random stream built on the Philox4x32-10 block cipher.
///
/// A stream is addressed by (master seed, replica, channel). Streams with
/// distinct addresses draw from disjoint counter lanes of the same keyed
/// cipher, so replicas can run in parallel while the whole experiment stays a
/// deterministic function of the master seed.
class RngStream {
 public:
  /// Channel tags partition the randomness consumed by one replica.
  enum class Channel : std::uint32_t {
    initial_condition = 0,
    dynamics = 1,
    scratch = 2,
  };

  RngStream(std::uint64_t master_seed, std::uint32_t replica, Channel channel)
      : master_seed_(master_seed),
        key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        replica_(replica),
        channel_(static_cast<std::uint32_t>(channel)) {}

  std::uint32_t next_u32() {
    if (available_ == 0) refill();
    return buffer_[--available_];
  }

  std::uint64_t next_u64() {
    if (available_ >= 2) {
      const std::uint64_t hi = buffer_[--available_];
      return (hi << 32) | buffer_[--available_];
    }
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exponential waiting time with the given rate (rate > 0).
  double exponential(double rate) { return -std::log(1.0 - uniform01()) / rate; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Unbiased uniform draw from {0, ..., n-1}, n >= 1.
  std::uint32_t uniform_below(std::uint32_t n) {
    // Lemire's multiply-shift with rejection of the biased residue band.
    std::uint64_t m = std::uint64_t(next_u32()) * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
      const std::uint32_t threshold = (0u - n) % n;
      while (low < threshold) {
        m = std::uint64_t(next_u32()) * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  /// Exact Poisson sample. Knuth multiplication below mean 10, Hormann's
  /// PTRS transformed rejection above.
  std::int64_t poisson(double mean);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze (any shape > 0).
  double gamma(double shape);

  /// Beta(a, b) from two gamma draws; used for uniform order statistics.
  double beta(double a, double b);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint32_t replica() const { return replica_; }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        replica_,
        channel_,
    };
    buffer_ = philox4x32(counter, key_);
    ++block_;
    available_ = 4;
  }

  std::uint64_t master_seed_;
  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::uint32_t replica_;
  std::uint32_t channel_;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
};

}  // namespace particle_limits

#endif
