#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "klemu/errors.hpp"

namespace klemu::rng {

/// SplitMix64 (Steele, Lea & Flood, 2014). Fully specified at the bit level,
/// so streams are reproducible across platforms and compilers. Consecutive
/// seeds give well-decorrelated streams, which is exactly what the frozen-seed
/// trajectory registry needs.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Map 64 random bits to a 53-bit uniform double in [0, 1).
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform strictly inside (0, 1); safe input for quantile functions. The
/// very top draw (1 - 2^-54) would round to 1.0 in double precision, so it
/// is clamped to the largest double below 1.
inline double unit_uniform_open(std::uint64_t bits) {
  const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  return u < 1.0 ? u : 0x1.fffffffffffffp-1;
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Inverse standard-normal CDF. Hastings' rational start (|err| < 4.5e-4)
/// polished by three Newton steps on the CDF, which saturates double
/// precision over the full open interval.
inline double standard_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DataError("standard_normal_quantile: u must lie in (0,1)");
  }
  const double p = u < 0.5 ? u : 1.0 - u;
  const double t = std::sqrt(-2.0 * std::log(p));
  double x = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                     (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
  if (u < 0.5) x = -x;
  constexpr double inv_sqrt_2pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  for (int i = 0; i < 3; ++i) {
    const double err = standard_normal_cdf(x) - u;
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
    if (!(pdf > 0.0)) break;
    x -= err / pdf;
  }
  return x;
}

/// Unbiased integer in [0, n). Lemire's multiply-with-rejection method.
inline std::uint64_t bounded(SplitMix64& g, std::uint64_t n) {
  if (n == 0) throw DataError("rng::bounded: n must be positive");
  unsigned __int128 m = static_cast<unsigned __int128>(g.next()) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (lo < threshold) {
      m = static_cast<unsigned __int128>(g.next()) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Fisher-Yates shuffle driven by the given stream.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace klemu::rng
