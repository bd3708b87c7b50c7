#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace feel {

/// SplitMix64 finalizer; bijective scramble of a 64-bit word.
constexpr std::uint64_t scramble64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a root seed and up to three
/// stream tags (purpose, round, device). All randomness in an experiment
/// flows from the root seed through this mixer, never from ambient state.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t z = scramble64(seed + 0x9e3779b97f4a7c15ULL);
  z = scramble64(z ^ (a + 0x9e3779b97f4a7c15ULL));
  z = scramble64(z ^ (b + 0x3c6ef372fe94f82aULL));
  z = scramble64(z ^ (c + 0x1b873593cc9e2d51ULL));
  return z;
}

/// Stream tags used by the simulator when deriving per-purpose substreams.
namespace stream {
inline constexpr std::uint64_t kPlacement = 1;
inline constexpr std::uint64_t kCapabilities = 2;
inline constexpr std::uint64_t kData = 3;
inline constexpr std::uint64_t kPartition = 4;
inline constexpr std::uint64_t kSplit = 5;
inline constexpr std::uint64_t kModelInit = 6;
inline constexpr std::uint64_t kFading = 7;
inline constexpr std::uint64_t kScheduler = 8;
inline constexpr std::uint64_t kTraining = 9;
} // namespace stream

/// Seeded random stream with explicit, implementation-pinned conversions.
/// std's distribution objects are deliberately avoided: their output is
/// unspecified across standard libraries, and experiment results must be
/// reproducible from the seed alone.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be >= 1. Rejection sampling, unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1)
      return 0;
    std::uint64_t x, r;
    do {
      x = eng_();
      r = x % n;
    } while (x - r > std::numeric_limits<std::uint64_t>::max() - (n - 1));
    return r;
  }

  /// Unit-mean exponential variate (Rayleigh fading power |h|^2).
  double exponential() { return -std::log1p(-uniform()); }

  /// Standard normal via Box-Muller; stateless between calls.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0)
      u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Fisher-Yates shuffle driven by uniform_int (stable across platforms).
  template <class T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 eng_;
};

} // namespace feel
