#pragma once

#include <cmath>
#include <numbers>

namespace rv2x {

// sin(x)/x
inline double sinc(double x) {
  double ax = std::abs(x);
  if (ax < 1e-4) {
    double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// exp(x^2) erfc(x), x >= 0 uses a continued fraction past 5
inline double erfcx(double x) {
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // Lentz-free evaluation of the Laplace continued fraction
  double f = x;
  for (int k = 60; k >= 1; --k) f = x + (k * 0.5) / f;
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// e^{r t + r^2/2} Q(t + r), evaluated without overflow
inline double shifted_gauss_tail(double t, double r) {
  double y = (t + r) / std::numbers::sqrt2;
  if (y < 5.0) return std::exp(r * t + 0.5 * r * r) * 0.5 * std::erfc(y);
  return 0.5 * erfcx(y) * std::exp(-0.5 * t * t);
}

inline double bessel_j0(double x) { return std::cyl_bessel_j(0.0, x); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace rv2x
