#pragma once

// Portable sampling helpers. The standard distributions are implementation
// defined; these are not, so seeded runs reproduce across toolchains.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace cj {

using Rng = std::mt19937_64;

inline double UnitDouble(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound), bound > 0, by rejection.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void Shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[UniformIndex(rng, i)]);
  }
}

// Standard normal via Box-Muller (one draw per call).
inline double StandardNormal(Rng& rng) {
  double u1;
  do {
    u1 = UnitDouble(rng);
  } while (u1 <= 0.0);
  const double u2 = UnitDouble(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cj
