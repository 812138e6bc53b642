#pragma once

#include <cmath>
#include <cstdint>

// Self-contained random number generation. The standard library distributions
// are not bit-reproducible across implementations, so everything downstream of
// a seed (engine, normal sampler, sub-stream derivation) is pinned down here.

namespace seqdf::rng {

// SplitMix64 step: advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives the seed of sub-stream `index` from a master seed. Sub-streams for
// distinct indices are decorrelated by the SplitMix64 finalizer, so
// replications may be generated in any order (or in parallel) and still give
// results identical to a sequential run.
inline std::uint64_t derive_subseed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master + index * 0x9E3779B97F4A7C15ULL;
  return splitmix64(state);
}

// xoshiro256++ engine, seeded through SplitMix64 so that any 64-bit seed
// (including 0) yields a valid nonzero state.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n). Rejection-free modulo is acceptable here: n is
  // always tiny relative to 2^64, so the bias is far below statistical noise.
  std::uint64_t uniform_below(std::uint64_t n) { return next() % n; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Standard normal sampler: Box-Muller on top of Xoshiro256++. Produces a
// fixed, platform-independent draw sequence for a given seed.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 on (0, 1] keeps log(u1) finite; u2 on [0, 1).
    const double u1 =
        static_cast<double>((engine_.next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_.next() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Xoshiro256pp engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace seqdf::rng
