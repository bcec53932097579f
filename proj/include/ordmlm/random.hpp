#pragma once

#include <cstdint>
#include <random>

namespace ordmlm {

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replicate `index` under master `seed`:
/// splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Portable random stream: 64-bit Mersenne Twister (the standard fixes its
/// output sequence) with hand-written transforms, since the standard
/// distribution classes are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1) from the top 53 bits.
  double uniform();
  /// Standard normal by Box-Muller (cosine branch only, two uniforms per draw).
  double normal();
  /// Index drawn by inverse CDF from probabilities summing to one.
  template <class Range>
  std::size_t categorical(const Range& probs) {
    const double v = uniform();
    double cum = 0.0;
    std::size_t i = 0, last = 0;
    for (double p : probs) {
      cum += p;
      if (v < cum) return i;
      if (p > 0.0) last = i;
      ++i;
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ordmlm
