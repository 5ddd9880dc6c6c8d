#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace psrl {

// Engine output is fully specified by the standard, so streams are
// reproducible across platforms. Distributions are derived by hand below
// for the same reason.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw over `weights` taken in order. Weights must sum to ~1;
/// rounding slack at the top end falls onto the last positive weight.
inline std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

}  // namespace psrl
