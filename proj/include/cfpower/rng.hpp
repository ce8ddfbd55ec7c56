#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace cfpower {

// Hand-rolled variate transforms so that a given seed produces the same
// stream on every standard library (distribution classes are not portable).
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double exponential_draw(std::mt19937_64& eng) {
  return -std::log1p(-uniform01(eng));
}

// Flat Dirichlet via normalized exponentials.
inline void dirichlet_flat(std::mt19937_64& eng, std::span<double> w) {
  double sum = 0.0;
  for (double& x : w) {
    x = exponential_draw(eng);
    sum += x;
  }
  if (sum <= 0.0) {
    const double u = 1.0 / static_cast<double>(w.size());
    for (double& x : w) x = u;
    return;
  }
  for (double& x : w) x /= sum;
}

inline double normal_draw(std::mt19937_64& eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

}  // namespace cfpower
