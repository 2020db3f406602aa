#pragma once

// Seeded randomness shared by every stochastic routine in the library.
//
// std::mt19937_64 is bit-specified by the standard, but the standard
// distributions are not, so the conversions below are written out to keep
// runs reproducible across standard library implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace fastcb {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream` under base seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n). Rejection keeps it exactly uniform.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Exact Binomial(n, p) draw.
///
/// Sequential inversion of the CDF whenever the mean of the smaller tail is
/// at most 500, which covers the rare-event regimes of the lower-bound
/// replicates (n ~ 1e8, n p ~ 1) without any approximation. Larger means fall
/// back to the standard library's exact rejection sampler.
inline std::uint64_t binomial(Rng& rng, std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial(rng, n, 1.0 - p);
  const double nd = static_cast<double>(n);
  if (nd * p > 500.0) {
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(rng);
  }
  const double odds = p / (1.0 - p);
  double pmf = std::exp(nd * std::log1p(-p));
  double cdf = pmf;
  const double u = uniform01(rng);
  std::uint64_t k = 0;
  while (u >= cdf && k < n) {
    pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pmf;
    // Rounding can leave cdf a hair under 1 once the pmf has underflowed.
    if (pmf == 0.0 && static_cast<double>(k) > nd * p) break;
  }
  return k;
}

}  // namespace fastcb
