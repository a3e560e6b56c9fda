#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace rv2x {

struct matching {
  std::vector<int> col_of_row;
  double cost = 0.0;
};

namespace detail {

// Shortest augmenting path with potentials; rows fixed[i] >= 0 are forced.
inline std::vector<int> assign_min_cost(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n, -1);
  for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

}  // namespace detail

// Minimum-weight perfect matching on a square matrix with entries in R or +inf.
// Among optimal matchings the lexicographically smallest (row by row) is returned.
inline std::optional<matching> hungarian_match(const std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  if (n == 0) return matching{};
  for (const auto& row : w)
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("hungarian_match: matrix must be square");
  double span = 0.0;
  for (const auto& row : w)
    for (double x : row) {
      if (std::isnan(x) || x == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("hungarian_match: entries must be finite or +inf");
      if (std::isfinite(x)) span = std::max(span, std::abs(x));
    }
  const double big = (span + 1.0) * (n + 1) * 4.0;
  auto finite = w;
  for (auto& row : finite)
    for (auto& x : row)
      if (!std::isfinite(x)) x = big;

  auto total = [&](const std::vector<std::vector<double>>& a, const std::vector<int>& col) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(col.size()); ++i) s += a[i][col[i]];
    return s;
  };
  auto base = detail::assign_min_cost(finite);
  double best = total(finite, base);
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(w[i][base[i]])) return std::nullopt;

  // Fix rows in order to the smallest column that keeps the optimum.
  const double tol = 1e-9 * (1.0 + std::abs(best));
  std::vector<int> fixed(n, -1);
  std::vector<char> col_taken(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (col_taken[j] || !std::isfinite(w[i][j])) continue;
      auto trial = finite;
      for (int r = 0; r <= i; ++r) {
        int c = r < i ? fixed[r] : j;
        for (int k = 0; k < n; ++k) {
          if (k != c) trial[r][k] = big * 4.0;
        }
        for (int rr = 0; rr < n; ++rr)
          if (rr != r) trial[rr][c] = big * 4.0;
      }
      auto col = detail::assign_min_cost(trial);
      if (total(trial, col) <= best + tol) {
        fixed[i] = j;
        col_taken[j] = 1;
        break;
      }
    }
    if (fixed[i] < 0) fixed[i] = base[i];
  }
  matching m;
  m.col_of_row = fixed;
  m.cost = total(w, fixed);
  return m;
}

}  // namespace rv2x
