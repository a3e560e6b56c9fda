#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "absorption.hpp"
#include "config.hpp"
#include "deconvolution.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "scenario.hpp"

namespace rv2x {

struct adaptation_context {
  // epoch large-scale gains
  double l_v = 1.0;
  double l_inm = 1.0;
  double l_i = 1.0;
  double l_vmn = 1.0;
  double delta = 0.5;
  // reported squared gains of the current slot
  double hat_gi = 1.0;
  double hat_gvmn = 1.0;
  double hat_gv = 1.0;
  double hat_ginm = 1.0;
  // constants
  double gamma_v = 0.0767;
  double k1 = 10.0;
  double k2 = 10.0;
  double noise = 0.0;
  double rate_req = 20e6;
  double bandwidth = 2e6;
  double prob_req = 0.95;
  double lambda_y = 1.0;
  power_box box;

  pair_snapshot snapshot() const { return {l_v, l_inm, delta, hat_gv, hat_ginm}; }
};

inline double c_param(double p_i, double p_v, const adaptation_context& x) {
  if (x.delta >= 1.0) throw std::invalid_argument("c_param: delta must be < 1");
  return x.gamma_v * p_i * x.l_inm / (p_v * x.l_v * (1.0 - x.delta * x.delta));
}

inline double ell(double c, const adaptation_context& x) {
  if (x.delta >= 1.0) throw std::invalid_argument("ell: delta must be < 1");
  double d2 = x.delta * x.delta;
  return x.hat_ginm - (x.hat_gv / c) * d2 / (1.0 - d2);
}

inline double c_box_lo(const adaptation_context& x) { return c_param(x.box.pi_min, x.box.pv_max, x); }
inline double c_box_hi(const adaptation_context& x) { return c_param(x.box.pi_max, x.box.pv_min, x); }

// Smallest c meeting the V2I rate requirement, noise ignored.
inline double c_throughput(const adaptation_context& x) {
  double thr = std::exp2(x.rate_req / x.bandwidth) - 1.0;
  return thr * x.gamma_v * x.l_inm * x.l_vmn * x.hat_gvmn / ((1.0 - x.delta * x.delta) * x.l_v * x.l_i * x.hat_gi);
}

struct beta_value {
  double raw = 0.0;
  double value = 0.0;  // clamped to [0, 1]
  double error = 0.0;
  int level = 0;
};

// Estimated satisfaction probability beta(c) from the empirical characteristic factor.
class beta_evaluator {
 public:
  beta_evaluator(const deconv_estimate& est, double k1, double k2, double tol = 1e-8)
      : cf_(est, k2 * std::numbers::pi), k1_(k1), tol_(tol) {}

  beta_value operator()(double c, double ell_value) {
    if (!(c > 0.0)) throw std::invalid_argument("beta: c must be positive");
    const double w = cf_.w_cut();
    double omega = std::max(std::abs(ell_value + cf_.zmax()), std::abs(ell_value + cf_.zmin() - k1_));
    int lvl = 3;
    while (lvl < empirical_cf::max_level && omega * w / (1 << lvl) > 3.0) ++lvl;
    // Window entirely to the right of every sample and too far away to resolve: the estimated density
    // only contributes kernel ripple there, of order K1 / (pi * distance).
    double gap = -(ell_value + cf_.zmax());
    if (omega * w / (1 << empirical_cf::max_level) > 3.0 && gap > 0.0) {
      ++evaluations_;
      return {1.0, 1.0, k1_ / (std::numbers::pi * gap), -1};
    }
    double last_err = 0.0;
    for (; lvl <= empirical_cf::max_level; ++lvl) {
      auto [integral, err] = integrate_level(c, ell_value, lvl);
      double raw = 1.0 - integral / std::numbers::pi;
      err /= std::numbers::pi;
      last_err = err;
      if (err <= tol_) {
        ++evaluations_;
        return {raw, std::clamp(raw, 0.0, 1.0), err, lvl};
      }
    }
    std::ostringstream os;
    os << "beta: quadrature did not converge (c=" << c << ", ell=" << ell_value << ", error=" << last_err
       << ", bandwidth=" << omega << ")";
    throw quadrature_error(os.str());
  }

  beta_value operator()(double c, const adaptation_context& x) { return (*this)(c, ell(c, x)); }

  long evaluations() const { return evaluations_; }
  double lambda() const { return cf_.lambda(); }

 private:
  // Re of int_0^W F{Phi}(w) chi(w) dw and its error estimate.
  std::pair<double, double> integrate_level(double c, double l, int lvl) {
    using g = gauss_kronrod15;
    const auto& chi = cf_.level(lvl);
    const int panels = 1 << lvl;
    const double h = cf_.w_cut() / panels;
    const double hk = 0.5 * k1_;
    std::array<double, 15> t, ur, ui, vr, vi, wk, wg;
    for (int j = 0; j < 15; ++j) {
      t[j] = 0.5 * h * (1.0 + g::node(j));
      ur[j] = std::cos(t[j] * l);
      ui[j] = std::sin(t[j] * l);
      vr[j] = std::cos(t[j] * hk);
      vi[j] = -std::sin(t[j] * hk);
      wk[j] = g::kronrod_weight(j) * 0.5 * h;
      wg[j] = g::gauss_weight(j) * 0.5 * h;
    }
    const double sur = std::cos(h * l), sui = std::sin(h * l);
    const double svr = std::cos(h * hk), svi = -std::sin(h * hk);
    const double decay = std::exp(-c * k1_), decay_m1 = std::expm1(-c * k1_);
    double Ur = 1.0, Ui = 0.0, Vr = 1.0, Vi = 0.0;
    double total = 0.0, err = 0.0;
    std::array<double, 15> f;
    for (int p = 0; p < panels; ++p) {
      const double a = p * h;
      const auto* x = chi.data() + static_cast<std::size_t>(p) * 15;
      double kr = 0.0, gs = 0.0;
      for (int j = 0; j < 15; ++j) {
        const double w = a + t[j];
        // e^{jw ell}
        const double er = Ur * ur[j] - Ui * ui[j], ei = Ur * ui[j] + Ui * ur[j];
        // E = e^{-jw K1/2}
        const double Er = Vr * vr[j] - Vi * vi[j], Ei = Vr * vi[j] + Vi * vr[j];
        // first term: E * (-2 Im E) / w
        const double s = -2.0 * Ei / w;
        const double t1r = Er * s, t1i = Ei * s;
        // e^{-jwK1} = E^2; numerator e^{-cK1} E^2 - 1, computed stably
        const double cos_x = Er * Er - Ei * Ei, sin_x = -2.0 * Er * Ei;
        const double nr = decay_m1 * cos_x - 2.0 * Ei * Ei, ni = -decay * sin_x;
        const double inv = 1.0 / (c * c + w * w);
        const double t2r = (nr * c + ni * w) * inv, t2i = (ni * c - nr * w) * inv;
        const double br = t1r + t2r, bi = t1i + t2i;
        const double fr = er * br - ei * bi, fi = er * bi + ei * br;
        f[j] = fr * x[j].real() - fi * x[j].imag();
        kr += wk[j] * f[j];
        gs += wg[j] * f[j];
      }
      double mean = kr / h, asc = 0.0;
      for (int j = 0; j < 15; ++j) asc += wk[j] * std::abs(f[j] - mean);
      total += kr;
      err += gk_panel_error(kr, gs, asc);
      double nUr = Ur * sur - Ui * sui;
      Ui = Ur * sui + Ui * sur;
      Ur = nUr;
      double nVr = Vr * svr - Vi * svi;
      Vi = Vr * svi + Vi * svr;
      Vr = nVr;
    }
    return {total, err};
  }

  empirical_cf cf_;
  double k1_, tol_;
  long evaluations_ = 0;
};

inline double u_value(double c, double lambda, double k2) {
  if (!(c > 0.0)) throw std::invalid_argument("u_value: c must be positive");
  const double w = k2 * std::numbers::pi;
  const double r = w / lambda;
  const double q = std::sqrt(1.0 + r * r);
  const double s = std::sqrt(c * c + w * w);
  return q + std::log(r / (q + 1.0)) + (c / lambda) * std::asinh(w / c) + std::log(c * w / (s + w)) / c;
}

// Left side of the sufficient monotonicity condition at x = 1/c.
inline double prop1_lhs(double x, double lambda, double k2) {
  const double d = 1.0 / (k2 * std::numbers::pi);
  const double s = std::sqrt(x * x + d * d);
  return x / s - std::asinh(x / d) - lambda * x * x * std::log(x + s);
}

inline bool check_prop1_condition(double lambda, double k2, const std::vector<double>& x_grid) {
  for (double x : x_grid) {
    if (!(x > 0.0)) throw std::invalid_argument("check_prop1_condition: grid values must be positive");
    double v = prop1_lhs(x, lambda, k2);
    if (v > 0.0) {
      std::ostringstream os;
      os << "K2=" << k2 << " violates the u(c) monotonicity condition at x=" << x << " (lambda_Y=" << lambda
         << ", value=" << v << ")";
      throw config_error(os.str());
    }
  }
  return true;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return g;
}

struct interval {
  double c_l = 0.0;
  double c_u = 0.0;
  bool feasible = false;
  bool from_root = false;
};

// Bisection in log c for the last c with beta(c) >= P0.
template <class Beta>
double beta_root(Beta&& beta, double lo, double hi, double p0, double rel_tol = 1e-6, int max_iter = 60) {
  for (int i = 0; i < max_iter && hi / lo - 1.0 > rel_tol; ++i) {
    double mid = std::sqrt(lo * hi);
    if (beta(mid) >= p0) lo = mid;
    else hi = mid;
  }
  return lo;
}

// beta: callable c -> probability, non-increasing in c.
template <class Beta>
interval feasible_interval(const adaptation_context& x, Beta&& beta) {
  interval r;
  const double lo = c_box_lo(x), hi = c_box_hi(x);
  r.c_l = std::max(c_throughput(x), lo);
  if (r.c_l > hi) {
    r.c_u = hi;
    return r;
  }
  if (beta(hi) >= x.prob_req) {
    r.c_u = hi;
  } else if (beta(r.c_l) < x.prob_req) {
    r.c_u = r.c_l * (1.0 - 1e-12);
    return r;
  } else {
    r.c_u = beta_root(beta, r.c_l, hi, x.prob_req);
    r.from_root = true;
  }
  r.feasible = r.c_l <= r.c_u;
  return r;
}

// c -> (p_v, p_i) on the box boundary.
inline power_pair powers_from_c(double c, const adaptation_context& x) {
  const double k = x.gamma_v * x.l_inm / (x.l_v * (1.0 - x.delta * x.delta));
  const double c_a = k * x.box.pi_min / x.box.pv_max;
  const double c_b = k * x.box.pi_max / x.box.pv_max;
  if (c <= c_a) return {x.box.pi_min, x.box.pv_max};
  if (c <= c_b) return {c * x.box.pv_max / k, x.box.pv_max};
  return {x.box.pi_max, std::max(x.box.pv_min, k * x.box.pi_max / c)};
}

struct power_decision {
  double p_v = 0.0;
  double p_i = 0.0;
  double c_star = 0.0;
  interval range;
  bool feasible = false;
};

inline double u_target(double c_l, double c_u, double lambda, double k2) {
  auto f = [&](double c) { return u_value(c, lambda, k2) - 1.0; };
  if (f(c_l) >= 0.0) return c_l;
  if (f(c_u) <= 0.0) return c_u;
  double lo = c_l, hi = c_u;
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-12; ++i) {
    double mid = std::sqrt(lo * hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

inline power_decision fallback_decision(const adaptation_context& x, const interval& r) {
  power_decision d;
  d.p_v = x.box.pv_max;
  d.p_i = x.box.pi_min;
  d.c_star = c_param(d.p_i, d.p_v, x);
  d.range = r;
  d.feasible = false;
  return d;
}

// Shared pipeline: feasible interval from beta, c* = argmin |u - 1|, mapped back to powers.
template <class Beta>
power_decision solve_with_beta(const adaptation_context& x, Beta&& beta) {
  auto r = feasible_interval(x, beta);
  if (!r.feasible) return fallback_decision(x, r);
  power_decision d;
  d.range = r;
  d.feasible = true;
  d.c_star = std::clamp(u_target(r.c_l, r.c_u, x.lambda_y, x.k2), r.c_l, r.c_u);
  auto p = powers_from_c(d.c_star, x);
  d.p_v = p.p_v;
  d.p_i = p.p_i;
  return d;
}

inline power_decision solve_power(const adaptation_context& x, beta_evaluator& beta) {
  return solve_with_beta(x, [&](double c) { return beta(c, x).value; });
}

inline double deviation_j(const std::vector<double>& estimated, const std::vector<double>& truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("deviation_j: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (estimated[i] - truth[i]) * (estimated[i] - truth[i]);
  return s;
}

}  // namespace rv2x
