#pragma once

#include <cstdint>

namespace printguard {

std::uint64_t splitmix64(std::uint64_t x);

/// PCG32 (XSH-RR, 64-bit state). Seeding follows the reference
/// pcg32_srandom_r, so Rng(42, 54) reproduces the published demo sequence.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Per-sample child stream: seed = splitmix64(master ^ index), stream = 2*index + 1.
  static Rng for_sample(std::uint64_t master_seed, std::uint64_t index);
  static std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index);
  static std::uint64_t sample_stream(std::uint64_t index) { return 2 * index + 1; }

  std::uint32_t next_u32();

  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint32_t below(std::uint32_t bound);

  /// lo + (hi - lo) * u with u = next_u32 / 2^32, so the result lies in [lo, hi).
  double uniform(double lo, double hi);

  /// Box-Muller without caching: every call consumes exactly two draws.
  double normal(double mean, double stddev);

  std::uint64_t state() const { return state_; }
  std::uint64_t increment() const { return inc_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

}  // namespace printguard
