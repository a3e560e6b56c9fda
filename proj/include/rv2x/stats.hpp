#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace rv2x {

inline std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return g;
}

// Empirical CDF of `values` at each grid point. Values are sorted in place.
inline std::vector<double> ecdf_on_grid(std::vector<double>& values, const std::vector<double>& grid) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    auto k = std::upper_bound(values.begin(), values.end(), x) - values.begin();
    out.push_back(values.empty() ? 0.0 : static_cast<double>(k) / values.size());
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

// Trapezoid integral of y over x.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace rv2x
