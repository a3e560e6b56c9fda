#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "adaptation.hpp"
#include "qos.hpp"

namespace rv2x {

struct gaussian_fit {
  double mean = 0.0;
  double variance = 1.0;
  bool floored = false;
};

// Moment matching on Z = E + Y with Y ~ Exp(lambda_y).
inline gaussian_fit fit_gaussian(const std::vector<double>& z, double lambda_y, double var_floor = 1e-6) {
  if (z.size() < 30) throw std::invalid_argument("fit_gaussian: need at least 30 samples");
  const double n = static_cast<double>(z.size());
  double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  double var = ss / (n - 1.0);
  gaussian_fit f;
  f.mean = mean - 1.0 / lambda_y;
  f.variance = var - 1.0 / (lambda_y * lambda_y);
  if (f.variance < var_floor) {
    f.variance = var_floor;
    f.floored = true;
  }
  return f;
}

inline double gaussian_beta(double c, double ell_value, const gaussian_fit& f) {
  return std::clamp(exp_vs_gauss_prob(c, ell_value, f.mean, f.variance), 0.0, 1.0);
}

inline power_decision gaussian_allocator(const adaptation_context& x, const gaussian_fit& f) {
  return solve_with_beta(x, [&](double c) { return gaussian_beta(c, ell(c, x), f); });
}

struct hpr_region {
  double lo = 0.0;
  double hi = 0.0;
};

// Shortest central order-statistic interval of e_k = z_k - 1/lambda_y holding at least a p0 share.
inline hpr_region fit_hpr(const std::vector<double>& z, double lambda_y, double p0) {
  if (z.empty()) throw std::invalid_argument("fit_hpr: empty sample set");
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::invalid_argument("fit_hpr: p0 must lie in (0,1)");
  std::vector<double> e(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) e[k] = z[k] - 1.0 / lambda_y;
  std::sort(e.begin(), e.end());
  const std::size_t n = e.size();
  std::size_t need = static_cast<std::size_t>(std::ceil(p0 * n - 1e-9));
  need = std::clamp<std::size_t>(need, 1, n);
  std::size_t i_lo = (n - need) / 2;
  return {e[i_lo], e[i_lo + need - 1]};
}

// Largest c meeting the delay constraint with e_nm = hi and |e_m|^2 = q.
inline double hpr_c_limit(const adaptation_context& x, const hpr_region& r, double q) {
  double d2 = x.delta * x.delta;
  double denom = x.hat_ginm + r.hi;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return (d2 / (1.0 - d2) * x.hat_gv + q) / denom;
}

inline power_decision hpr_allocator(const adaptation_context& x, const hpr_region& r) {
  interval iv;
  iv.c_l = std::max(c_throughput(x), c_box_lo(x));
  iv.c_u = std::min(hpr_c_limit(x, r, -std::log(x.prob_req)), c_box_hi(x));
  iv.feasible = iv.c_l <= iv.c_u;
  if (!iv.feasible) return fallback_decision(x, iv);
  power_decision d;
  d.range = iv;
  d.feasible = true;
  d.c_star = iv.c_u;
  auto p = powers_from_c(d.c_star, x);
  d.p_v = p.p_v;
  d.p_i = p.p_i;
  return d;
}

}  // namespace rv2x
