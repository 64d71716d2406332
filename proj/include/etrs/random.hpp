// Portable, seedable pseudo-random numbers.
//
// Generator: SplitMix64 (Steele, Lea, Flood 2014) evaluated in counter mode, i.e.
// the k-th draw of stream `seed` is mix(seed + (k+1)·0x9E3779B97F4A7C15).
// Uniform doubles use the top 53 bits; normals use Box–Muller with both
// outputs consumed in order. Unlike std:: distributions, the output sequence is
// fixed by this file alone, so generated instances are identical across
// compilers and platforms.
#pragma once

#include "etrs/common.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace etrs {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t r;
    do r = next_u64(); while (r >= limit);
    return r % bound;
  }

  /// Standard normal.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector uniform_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }

  /// Derives an independent stream from (seed, tag) for sub-tasks.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 g(seed ^ (tag * 0xD1B54A32D192ED03ULL));
    return g.next_u64();
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace etrs
