#pragma once

#include <stdexcept>

#include "shapeopt/grid.hpp"

namespace shapeopt {

/// Smoothing width for the regularized step function; strictly positive.
struct Smoothing {
  double eps;
  explicit Smoothing(double e) : eps(e) {
    if (!(e > 0.0)) throw std::invalid_argument("Smoothing: eps must be > 0");
  }
};

/// Sharp step: 0 for v <= 0, 1 for v > 0.
inline double heaviside(double v) { return v > 0.0 ? 1.0 : 0.0; }

/// C^1 regularization rising from 0 to 1 on (0, eps) via a cubic polynomial.
/// Below the sharp step everywhere and monotone in v.
inline double heaviside_eps(Smoothing s, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= s.eps) return 1.0;
  return v * v * (3.0 * s.eps - 2.0 * v) / (s.eps * s.eps * s.eps);
}

inline double heaviside_eps_prime(Smoothing s, double v) {
  if (v <= 0.0 || v >= s.eps) return 0.0;
  return 6.0 * v * (s.eps - v) / (s.eps * s.eps * s.eps);
}

inline Field heaviside(const Field& f) {
  return apply(f, [](double v) { return heaviside(v); });
}

inline Field heaviside_eps(Smoothing s, const Field& f) {
  return apply(f, [s](double v) { return heaviside_eps(s, v); });
}

inline Field heaviside_eps_prime(Smoothing s, const Field& f) {
  return apply(f, [s](double v) { return heaviside_eps_prime(s, v); });
}

}  // namespace shapeopt
