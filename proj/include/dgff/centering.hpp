#pragma once

#include <cmath>
#include <stdexcept>

namespace dgff {

// m_N = 2 sqrt(g) log N - (3/4) sqrt(g) log log N, no argument guard;
// scales as small as N = 2 appear inside the concentric control bounds
inline double m_centering_raw(double N) {
  constexpr double sqrt_g = 0.7978845608028654; // sqrt(2/pi)
  double ln = std::log(N);
  return 2.0 * sqrt_g * ln - 0.75 * sqrt_g * std::log(ln);
}

// centering sequence for the maximum
inline double m_N(double N) {
  if (!(N >= 3.0)) throw std::domain_error("m_N: N must be >= 3");
  return m_centering_raw(N);
}

} // namespace dgff
