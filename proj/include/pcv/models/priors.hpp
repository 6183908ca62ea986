#pragma once

// Prior densities and draws shared by the example models. Densities omit
// the unconstrained-space Jacobian; callers add it where they transform.

#include <cmath>

#include "pcv/rng.hpp"

namespace pcv {

// Half-normal with variance v, support x > 0.
inline double log_half_normal(double x, double v) {
  return 0.5 * std::log(2.0 / (3.141592653589793238462643383279 * v)) -
         x * x / (2.0 * v);
}

// Gamma(shape a, rate r) at x > 0.
inline double log_gamma_pdf(double x, double a, double r) {
  return a * std::log(r) - std::lgamma(a) + (a - 1.0) * std::log(x) - r * x;
}

inline double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

// Marsaglia-Tsang Gamma(shape a, rate r) draw, boosted for a < 1.
inline double gamma_draw(CounterRng& rng, double a, double r) {
  double boost = 1.0;
  if (a < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
      return boost * d * v / r;
  }
}

inline double beta_draw(CounterRng& rng, double a, double b) {
  const double x = gamma_draw(rng, a, 1.0);
  const double y = gamma_draw(rng, b, 1.0);
  return x / (x + y);
}

}  // namespace pcv
