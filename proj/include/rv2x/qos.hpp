#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "error_law.hpp"
#include "scenario.hpp"
#include "special.hpp"

namespace rv2x {

// match[m] = n means V2V link m reuses the RB of V2I link n.
struct allocation_decision {
  std::vector<int> match;
  std::vector<double> p_v;  // indexed by m
  std::vector<double> p_i;  // indexed by n
  int first_slot = 0;
  int last_slot = 0;

  void validate(const power_box& box) const {
    const std::size_t k = match.size();
    if (p_v.size() != k || p_i.size() != k) throw std::invalid_argument("allocation: size mismatch");
    std::vector<int> seen(k, 0);
    for (int n : match) {
      if (n < 0 || n >= static_cast<int>(k) || seen[n]++) throw std::invalid_argument("allocation: not a permutation");
    }
    const double eps = 1e-9;
    for (double p : p_v)
      if (p < box.pv_min * (1 - eps) || p > box.pv_max * (1 + eps)) throw std::invalid_argument("allocation: p_v outside box");
    for (double p : p_i)
      if (p < box.pi_min * (1 - eps) || p > box.pi_max * (1 + eps)) throw std::invalid_argument("allocation: p_i outside box");
  }
};

struct sinr_value {
  double value = 0.0;
  bool capped = false;
};

inline constexpr double sinr_cap = 1e15;

inline sinr_value guarded_ratio(double signal, double denom) {
  if (denom <= 0.0 || signal / denom > sinr_cap) return {signal > 0.0 ? sinr_cap : 0.0, signal > 0.0};
  return {signal / denom, false};
}

// V2V link m sharing RB n. The interference gain is clamped at 0.
inline sinr_value sinr_v2v(double p_v, double l_v, double g_v, double p_i, double l_inm, double g_inm, double noise) {
  return guarded_ratio(p_v * l_v * g_v, p_i * l_inm * std::max(g_inm, 0.0) + noise);
}

inline sinr_value sinr_v2i(double p_i, double l_i, double g_i, double p_v, double l_vmn, double g_vmn, double noise) {
  return guarded_ratio(p_i * l_i * g_i, p_v * l_vmn * g_vmn + noise);
}

inline double throughput(double sinr, double bandwidth) {
  if (sinr < 0.0) throw std::invalid_argument("throughput: negative sinr");
  return bandwidth * std::log2(1.0 + sinr);
}

inline double delay(double sinr, double bandwidth, double packet_size) {
  if (sinr < 0.0) throw std::invalid_argument("delay: negative sinr");
  if (sinr == 0.0) return std::numeric_limits<double>::infinity();
  return packet_size / (bandwidth * std::log1p(sinr) / std::numbers::ln2);
}

// P{SINR_V >= thr} under Rayleigh direct and interference fading.
inline double delay_outage_closed_form(double p_v, double l_v, double p_i, double l_i, double noise, double thr) {
  double s = p_v * l_v;
  return std::exp(-noise * thr / s) / (1.0 + (p_i * l_i / s) * thr);
}

// Hazard rate of the delay at tau0, derived from the outage probability above.
inline double hazard_rate(double p_v, double l_v, double p_i, double l_i, double noise, const qos_constants& k) {
  double g = k.gamma_v;
  double a = noise / (p_v * l_v);
  double o = p_v * l_v / (p_i * l_i);
  double q = 1.0 + g / o;
  double e = std::exp(-a * g);
  return k.d_v * e * (a * q + 1.0 / o) / (q * (q - e));
}

// The closed form as printed in the source derivation; kept for comparison only.
inline double hazard_rate_printed(double p_v, double l_v, double p_i, double l_i, double noise, const qos_constants& k) {
  double g = k.gamma_v;
  double s = p_v * l_v;
  double r = p_i * l_i / s;
  double e = std::exp(-noise * g / s);
  double den = 1.0 + r * g - e;
  return k.d_v * e * (r + noise / s * (1.0 + r * g)) / (den * den);
}

inline double hazard_rate_noise_free(double o, const qos_constants& k) { return o * k.d_v / (k.gamma_v * k.gamma_v); }

// Snapshot of what a V2V pair (m, n) sees in one slot.
struct pair_snapshot {
  double l_v = 1.0;
  double l_inm = 1.0;
  double delta = 0.5;
  double hat_gv = 1.0;
  double hat_ginm = 1.0;
};

inline double b_value(double p_v, double p_i, const pair_snapshot& s, double noise, double gamma_v) {
  return noise + p_i * s.l_inm * s.hat_ginm - p_v * s.l_v * s.delta * s.delta * s.hat_gv / gamma_v;
}

inline double c_value(double p_v, double p_i, const pair_snapshot& s, double gamma_v) {
  return gamma_v * p_i * s.l_inm / (p_v * s.l_v * (1.0 - s.delta * s.delta));
}

// P{X >= c (e + ell)} with X ~ Exp(1), e ~ N(mean, var).
inline double exp_vs_gauss_prob(double c, double ell, double mean, double var) {
  double s = std::sqrt(var);
  double t = (-ell - mean) / s;
  return normal_cdf(t) + shifted_gauss_tail(t, c * s);
}

inline double exp_vs_mixture_prob(double c, double ell, const error_distribution& law) {
  double p = 0.0;
  for (const auto& comp : law.components()) p += comp.weight * exp_vs_gauss_prob(c, ell, comp.mean, comp.variance);
  return std::min(1.0, std::max(0.0, p));
}

// True delay-satisfaction probability under the hidden law, noise included.
inline double true_satisfaction_prob(double p_v, double p_i, const pair_snapshot& s, double noise, double gamma_v,
                                     const error_distribution& law) {
  double ell = b_value(p_v, p_i, s, noise, gamma_v) / (p_i * s.l_inm);
  if (s.delta >= 1.0) return law.cdf(-ell);
  return exp_vs_mixture_prob(c_value(p_v, p_i, s, gamma_v), ell, law);
}

template <class Rng>
double true_satisfaction_prob_mc(double p_v, double p_i, const pair_snapshot& s, double noise, double gamma_v,
                                 const error_distribution& law, int n_draws, Rng& rng) {
  if (n_draws < 1000) throw std::invalid_argument("true_satisfaction_prob_mc: n_draws must be >= 1000");
  double b = b_value(p_v, p_i, s, noise, gamma_v);
  double a = p_v * s.l_v * (1.0 - s.delta * s.delta) / gamma_v;
  double w = p_i * s.l_inm;
  std::exponential_distribution<double> exp1(1.0);
  long hits = 0;
  for (int k = 0; k < n_draws; ++k) {
    double x = exp1(rng);
    double e = law.sample(rng);
    if (a * x - w * e >= b) ++hits;
  }
  return static_cast<double>(hits) / n_draws;
}

}  // namespace rv2x

namespace rv2x {

struct link_qos {
  double delay = 0.0;       // seconds, +inf at zero SINR
  double throughput = 0.0;  // bit/s
  bool satisfied = false;
  bool clamped = false;
};

struct qos_params {
  double noise = 0.0;
  double bandwidth = 2e6;
  double packet_size = 3200.0;
  double delay_req = 0.015;
};

// Realized QoS of V2V link m and its matched V2I link n in one slot, true gains.
template <class Channel, class Large>
link_qos realized_qos(const Channel& ch, const Large& large, int m, int n, double p_v, double p_i,
                      const qos_params& q) {
  link_qos r;
  double g_inm = ch.ginm_at(m, n);
  r.clamped = g_inm < 0.0;
  auto sv = sinr_v2v(p_v, large.l_v[m], ch.gv[m], p_i, large.inm(m, n), g_inm, q.noise);
  auto si = sinr_v2i(p_i, large.l_i[n], ch.gi(n), p_v, large.vmn(m, n), ch.gvmn(m, n), q.noise);
  r.delay = delay(sv.value, q.bandwidth, q.packet_size);
  r.throughput = throughput(si.value, q.bandwidth);
  r.satisfied = r.delay <= q.delay_req * (1.0 + 1e-12);
  return r;
}

}  // namespace rv2x
