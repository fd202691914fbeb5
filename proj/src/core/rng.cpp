#include "printguard/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "printguard/core/error.hpp"

namespace printguard {

namespace {
constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : state_(0), inc_((stream << 1u) | 1u) {
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint64_t Rng::sample_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(master_seed ^ index);
}

Rng Rng::for_sample(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(sample_seed(master_seed, index), sample_stream(index));
}

std::uint32_t Rng::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

std::uint32_t Rng::below(std::uint32_t bound) {
  if (bound == 0) throw InvalidArgument("Rng::below requires a positive bound");
  const std::uint32_t threshold = (-bound) % bound;
  while (true) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

double Rng::uniform(double lo, double hi) {
  if (lo > hi) throw InvalidArgument("uniform: lo > hi");
  const double u = static_cast<double>(next_u32()) * 0x1p-32;
  return lo + (hi - lo) * u;
}

double Rng::normal(double mean, double stddev) {
  if (!(stddev >= 0.0)) throw InvalidArgument("normal: negative standard deviation");
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = 1.0 - static_cast<double>(next_u32()) * 0x1p-32;
  const double u2 = static_cast<double>(next_u32()) * 0x1p-32;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

}  // namespace printguard
