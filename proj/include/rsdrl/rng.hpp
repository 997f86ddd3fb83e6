#pragma once

#include <cstdint>
#include <limits>

namespace rsdrl {

/// SplitMix64 finalizer; a bijective 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/**
 * Counter-based generator: the i-th output is mix64(key + i * golden gamma),
 * i.e. SplitMix64. Every (seed, episode) pair maps to its own key, so episode
 * streams are independent of scheduling and of each other.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t key) : key_(key) {}

  /// Stream for one episode of one experiment seed.
  static StreamRng for_episode(std::uint64_t seed, std::uint64_t episode) {
    return StreamRng(mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) + episode));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rsdrl
