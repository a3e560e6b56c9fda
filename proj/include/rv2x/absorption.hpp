#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "config.hpp"
#include "deconvolution.hpp"
#include "hungarian.hpp"
#include "qos.hpp"

namespace rv2x {

inline double collect_sample(double true_rss, double nominal_rss, double p_i_a, double l_inm, double p_v_a,
                             double l_v, double delta, double hat_gv) {
  double w = p_i_a * l_inm;
  return (true_rss - nominal_rss) / w + (p_v_a * l_v / w) * (1.0 - delta * delta) * hat_gv;
}

inline double lambda_y(double p_i_a, double l_inm, double p_v_a, double l_v, double delta) {
  return p_i_a * l_inm / (p_v_a * l_v * (1.0 - delta * delta));
}

// Bracketed factor of the variance term, as a function of beta * o.
inline double capability_factor(double delta, double o, double k) {
  double x = k * std::numbers::pi * (1.0 - delta * delta) * o;
  double r = std::sqrt(1.0 + x * x);
  double t = r + std::asinh(x) / x;
  return t * t;
}

inline double adaptation_capability_bound(double delta, double o, double k, int t) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("adaptation_capability_bound: delta outside (0,1)");
  if (!(o > 0.0)) throw std::invalid_argument("adaptation_capability_bound: o must be positive");
  return k * k / (4.0 * t) * capability_factor(delta, o, k);
}

struct power_pair {
  double p_i = 0.0;
  double p_v = 0.0;
};

// Highest-power minimizer of o over D_nm; empty D_nm gives nullopt.
inline std::optional<power_pair> absorption_power(double lambda, const power_box& b) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("absorption_power: lambda must be >= 0");
  if (lambda > 1.0) return std::nullopt;
  if (lambda <= b.pi_min * b.pv_min / (b.pi_max * b.pv_max)) return power_pair{b.pi_max, b.pv_min};
  if (lambda <= b.pi_min / b.pi_max) return power_pair{b.pi_max, b.pi_max * b.pv_max * lambda / b.pi_min};
  return power_pair{b.pi_min / lambda, b.pv_max};
}

inline bool in_feasible_set(double p_i, double p_v, double lambda, const power_box& b, double rel = 1e-12) {
  return p_v >= b.pv_min * (1 - rel) && p_v <= b.pv_max * (1 + rel) && p_i >= b.pi_min * (1 - rel) &&
         p_i <= b.pi_max * (1 + rel) && p_v / p_i >= lambda * b.pv_max / b.pi_min * (1 - rel);
}

inline double edge_weight(double l_v, double l_inm, double delta, double lambda, const power_box& b, double k) {
  auto p = absorption_power(lambda, b);
  if (!p) return std::numeric_limits<double>::infinity();
  double o = p->p_v * l_v / (p->p_i * l_inm);
  return capability_factor(delta, o, k);
}

struct absorption_plan {
  std::vector<int> match;  // V2V m -> V2I n
  std::vector<double> p_i_a;
  std::vector<double> p_v_a;
  std::vector<double> phi;
  std::vector<double> bound;
  double total_weight = 0.0;
};

// Edge weights, matching, absorption powers.
inline absorption_plan plan_absorption(const large_scale_state& large, const std::vector<double>& hr_weights,
                                       const power_box& b, double k, int t, bool identity = false) {
  const int M = large.m;
  std::vector<std::vector<double>> w(M, std::vector<double>(large.n));
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < large.n; ++n) w[m][n] = edge_weight(large.l_v[m], large.inm(m, n), large.delta[m], hr_weights[m], b, k);
  absorption_plan plan;
  if (identity) {
    plan.match.resize(M);
    for (int m = 0; m < M; ++m) {
      if (!std::isfinite(w[m][m])) throw std::runtime_error("plan_absorption: identity matching infeasible");
      plan.match[m] = m;
    }
  } else {
    auto res = hungarian_match(w);
    if (!res) throw std::runtime_error("plan_absorption: no finite-weight matching");
    plan.match = res->col_of_row;
  }
  for (int m = 0; m < M; ++m) {
    int n = plan.match[m];
    auto p = *absorption_power(hr_weights[m], b);
    plan.p_i_a.push_back(p.p_i);
    plan.p_v_a.push_back(p.p_v);
    plan.phi.push_back(w[m][n]);
    plan.bound.push_back(k * k / (4.0 * t) * w[m][n]);
    plan.total_weight += w[m][n];
  }
  return plan;
}

enum class phase { absorption, adaptation };

struct slot_record {
  int slot = 0;
  phase ph = phase::absorption;
  int pair = 0;
  double p_v = 0.0;
  double p_i = 0.0;
  double delay = 0.0;
  double throughput = 0.0;
  bool satisfied = false;
  bool infeasible = false;
};

struct absorption_result {
  absorption_plan plan;
  std::vector<deconv_estimate> estimates;
  std::vector<slot_record> log;
  channel_state last;
  long clamp_count = 0;
};

// Simulates T slots under the fixed absorption plan and collects samples per pair.
inline absorption_result run_absorption(const sim_config& cfg, const large_scale_state& large, fading_streams& streams,
                                        double noise) {
  absorption_result res;
  res.plan = plan_absorption(large, cfg.hr_weights, cfg.box, cfg.trunc_k, cfg.absorption_len, cfg.identity_matching);
  const int M = large.m;
  qos_params q{noise, cfg.bandwidth, cfg.packet_size, cfg.delay_req};
  res.estimates.resize(M);
  for (int m = 0; m < M; ++m) {
    int n = res.plan.match[m];
    auto& e = res.estimates[m];
    e.k = cfg.trunc_k;
    e.p_i_a = res.plan.p_i_a[m];
    e.p_v_a = res.plan.p_v_a[m];
    e.lambda_y = lambda_y(e.p_i_a, large.inm(m, n), e.p_v_a, large.l_v[m], large.delta[m]);
    e.z.reserve(cfg.absorption_len);
  }
  channel_state ch = initial_channel_state(M, large.n);
  res.log.reserve(static_cast<std::size_t>(cfg.absorption_len) * M);
  for (int t = 0; t < cfg.absorption_len; ++t) {
    ch = evolve_small_scale(ch, large, cfg.error_law, streams);
    for (int m = 0; m < M; ++m) {
      int n = res.plan.match[m];
      double pv = res.plan.p_v_a[m], pi = res.plan.p_i_a[m];
      double li = large.inm(m, n), lv = large.l_v[m];
      double r = pi * li * ch.ginm_at(m, n) + pv * lv * ch.gv[m] + noise;
      double r_hat = pi * li * ch.hat_ginm_at(m, n) + pv * lv * ch.hat_gv[m] + noise;
      res.estimates[m].z.push_back(collect_sample(r, r_hat, pi, li, pv, lv, large.delta[m], ch.hat_gv[m]));
      auto lq = realized_qos(ch, large, m, n, pv, pi, q);
      res.clamp_count += lq.clamped;
      res.log.push_back({t, phase::absorption, m, pv, pi, lq.delay, lq.throughput, lq.satisfied, false});
    }
  }
  res.last = ch;
  return res;
}

}  // namespace rv2x
