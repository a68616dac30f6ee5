#pragma once

#include <cstdint>

namespace pinn {

/// Deterministic 64-bit generator (splitmix64). All randomness in the
/// toolkit flows from run seeds through this generator, so results are
/// reproducible bit-for-bit across platforms; the standard-library
/// distributions are avoided on purpose (their output is
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed0_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Independent substream derived from the *initial* seed, so forking is
  /// insensitive to how many values were already drawn.
  Rng fork(std::uint64_t stream) const {
    std::uint64_t z = seed0_ + 0x632be59bd9b4e019ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed0_;
  std::uint64_t state_;
};

}  // namespace pinn
