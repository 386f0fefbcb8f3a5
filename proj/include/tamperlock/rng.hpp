#pragma once

// Deterministic counter-mode generator (SplitMix64).  Every stochastic
// operation in the library takes one of these explicitly so that results are
// bit-reproducible across runs and platforms; nothing uses <random>
// distributions, whose outputs are not specified exactly.

#include <cassert>
#include <cstdint>

namespace tamperlock {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Fibonacci-hash finalizer used by SplitMix64 (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// SplitMix64 run in counter mode: the i-th output is mix64(seed + i*gamma),
/// so a generator is fully described by (seed, draws made so far).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix64(seed_ + counter_ * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return next_double() < p; }

  /// Exactly uniform value in [0, bound) via mask-and-reject on the low bits.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    assert(bound >= 1);
    if (bound == 1) return 0;
    const std::uint64_t mask = mask_for(bound - 1);
    std::uint64_t v = next_u64() & mask;
    while (v >= bound) v = next_u64() & mask;
    return v;
  }

  /// Independent child stream for e.g. trial #index of a Monte Carlo run;
  /// deterministic in (seed, index) and unaffected by draws made so far.
  Rng fork(std::uint64_t index) const noexcept {
    return Rng(mix64(seed_ ^ mix64(index + kGoldenGamma)));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t mask_for(std::uint64_t v) noexcept {
    std::uint64_t m = v;
    m |= m >> 1; m |= m >> 2; m |= m >> 4;
    m |= m >> 8; m |= m >> 16; m |= m >> 32;
    return m;
  }

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace tamperlock
