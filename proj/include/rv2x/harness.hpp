#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "absorption.hpp"
#include "adaptation.hpp"
#include "baselines.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "deconvolution.hpp"
#include "errors.hpp"
#include "qos.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "stats.hpp"

namespace rv2x {

enum class allocator_kind { proposed, gaussian, hpr };

inline const char* allocator_name(allocator_kind a) {
  switch (a) {
    case allocator_kind::proposed: return "proposed";
    case allocator_kind::gaussian: return "gaussian";
    case allocator_kind::hpr: return "hpr";
  }
  return "?";
}

inline allocator_kind parse_allocator(const std::string& s) {
  if (s == "proposed") return allocator_kind::proposed;
  if (s == "gaussian") return allocator_kind::gaussian;
  if (s == "hpr") return allocator_kind::hpr;
  throw config_error("unknown allocator '" + s + "'");
}

struct pdf_curves {
  std::vector<double> grid;
  std::vector<double> truth;
  std::vector<double> best;   // pair with the smallest capability factor
  std::vector<double> worst;  // pair with the largest
};

struct trial_result {
  int trial = 0;
  bool ok = false;
  std::string error;
  std::vector<slot_record> log;
  std::vector<double> lambda_y;
  std::vector<double> phi;
  std::vector<double> ise;
  std::vector<double> j_trace;  // one value per adaptation slot
  long infeasible = 0;
  long clamped = 0;
  long prop1_violations = 0;
  long negative_variance_fits = 0;
  std::optional<pdf_curves> curves;
};

struct run_report {
  sim_config cfg;
  allocator_kind alloc = allocator_kind::proposed;
  int trials = 0;
  std::vector<trial_result> results;  // in trial order
};

namespace detail {

inline std::vector<double> law_grid(const error_distribution& law, int points) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : law.components()) {
    double s = std::sqrt(c.variance);
    lo = std::min(lo, c.mean - 6.0 * s);
    hi = std::max(hi, c.mean + 6.0 * s);
  }
  return linear_grid(lo, hi, points);
}

inline double ise(const deconv_estimate& est, const error_distribution& law, const std::vector<double>& grid) {
  auto f = estimate_pdf(est, grid);
  std::vector<double> d2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double d = f[i] - law.pdf(grid[i]);
    d2[i] = d * d;
  }
  return trapezoid(grid, d2);
}

inline adaptation_context make_context(const sim_config& cfg, const large_scale_state& large, const channel_state& ch,
                                       int m, int n, double noise, double gamma_v, double lambda) {
  adaptation_context x;
  x.l_v = large.l_v[m];
  x.l_inm = large.inm(m, n);
  x.l_i = large.l_i[n];
  x.l_vmn = large.vmn(m, n);
  x.delta = large.delta[m];
  if (ch.m > 0) {
    x.hat_gi = ch.hat_gi[n];
    x.hat_gvmn = ch.hat_gvmn[m * ch.n + n];
    x.hat_gv = ch.hat_gv[m];
    x.hat_ginm = ch.hat_ginm[m * ch.n + n];
  }
  x.gamma_v = gamma_v;
  x.k1 = cfg.trunc_k1;
  x.k2 = cfg.trunc_k2;
  x.noise = noise;
  x.rate_req = cfg.rate_req;
  x.bandwidth = cfg.bandwidth;
  x.prob_req = cfg.prob_req;
  x.lambda_y = lambda;
  x.box = cfg.box;
  return x;
}

inline int env_threads() {
  if (const char* s = std::getenv("RV2X_THREADS")) {
    int v = std::atoi(s);
    if (v > 0) return v;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? static_cast<int>(h) : 1;
}

}  // namespace detail

// One epoch: topology, large scale, absorption, adaptation under the chosen allocator.
inline trial_result run_trial(const sim_config& cfg, allocator_kind alloc, int trial, bool keep_curves = false) {
  trial_result out;
  out.trial = trial;
  try {
    const std::uint64_t seed = cfg.rng_seed;
    auto topo_rng = make_stream(seed, trial, 0, purpose::topology);
    auto topo = build_topology(cfg, topo_rng);
    auto shadow_rng = make_stream(seed, trial, 0, purpose::shadowing);
    auto large = draw_large_scale(cfg, topo, shadow_rng);
    fading_streams streams(seed, trial, large.m, large.n);
    const double noise = noise_power(cfg);
    const auto k = make_qos_constants(cfg);

    auto abs = run_absorption(cfg, large, streams, noise);
    out.log = std::move(abs.log);
    out.clamped = abs.clamp_count;
    const int M = large.m;

    auto grid = detail::law_grid(cfg.error_law, 401);
    std::vector<beta_evaluator> betas;
    std::vector<gaussian_fit> fits(M);
    std::vector<hpr_region> regions(M);
    betas.reserve(M);
    for (int m = 0; m < M; ++m) {
      const auto& est = abs.estimates[m];
      out.lambda_y.push_back(est.lambda_y);
      out.phi.push_back(abs.plan.phi[m]);
      out.ise.push_back(detail::ise(est, cfg.error_law, grid));
      betas.emplace_back(est, cfg.trunc_k1, cfg.trunc_k2, cfg.quad_tol);
      if (alloc == allocator_kind::gaussian) {
        if (cfg.gauss_mode == gaussian_mode::zero_mean) {
          fits[m] = {0.0, 1.0, false};
        } else {
          fits[m] = fit_gaussian(est.z, est.lambda_y, cfg.gauss_var_floor);
          out.negative_variance_fits += fits[m].floored;
        }
      }
      if (alloc == allocator_kind::hpr) regions[m] = fit_hpr(est.z, est.lambda_y, cfg.prob_req);

      auto x = detail::make_context(cfg, large, initial_channel_state(0, 0), m, abs.plan.match[m], noise,
                                    k.gamma_v, est.lambda_y);
      double lo = c_box_lo(x), hi = c_box_hi(x);
      try {
        check_prop1_condition(est.lambda_y, cfg.trunc_k2, log_grid(1.0 / hi, 1.0 / lo, 200));
      } catch (const config_error&) {
        ++out.prop1_violations;
        if (cfg.strict_prop1) throw;
      }
    }

    if (keep_curves && M > 0) {
      pdf_curves pc;
      pc.grid = grid;
      for (double e : grid) pc.truth.push_back(cfg.error_law.pdf(e));
      auto best = std::min_element(out.phi.begin(), out.phi.end()) - out.phi.begin();
      auto worst = std::max_element(out.phi.begin(), out.phi.end()) - out.phi.begin();
      pc.best = estimate_pdf(abs.estimates[best], grid);
      pc.worst = estimate_pdf(abs.estimates[worst], grid);
      out.curves = std::move(pc);
    }

    qos_params q{noise, cfg.bandwidth, cfg.packet_size, cfg.delay_req};
    channel_state ch = abs.last;
    out.log.reserve(out.log.size() + static_cast<std::size_t>(cfg.adaptation_len) * M);
    std::vector<double> est_p(M), true_p(M);
    for (int t = 0; t < cfg.adaptation_len; ++t) {
      ch = evolve_small_scale(ch, large, cfg.error_law, streams);
      for (int m = 0; m < M; ++m) {
        int n = abs.plan.match[m];
        auto x = detail::make_context(cfg, large, ch, m, n, noise, k.gamma_v, abs.estimates[m].lambda_y);
        power_decision d;
        switch (alloc) {
          case allocator_kind::proposed: d = solve_power(x, betas[m]); break;
          case allocator_kind::gaussian: d = gaussian_allocator(x, fits[m]); break;
          case allocator_kind::hpr: d = hpr_allocator(x, regions[m]); break;
        }
        if (alloc == allocator_kind::gaussian) est_p[m] = gaussian_beta(d.c_star, ell(d.c_star, x), fits[m]);
        else est_p[m] = betas[m](d.c_star, x).value;
        true_p[m] = true_satisfaction_prob(d.p_v, d.p_i, x.snapshot(), noise, k.gamma_v, cfg.error_law);
        auto lq = realized_qos(ch, large, m, n, d.p_v, d.p_i, q);
        out.clamped += lq.clamped;
        out.infeasible += !d.feasible;
        out.log.push_back({cfg.absorption_len + t, phase::adaptation, m, d.p_v, d.p_i, lq.delay, lq.throughput,
                           lq.satisfied, !d.feasible});
      }
      out.j_trace.push_back(deviation_j(est_p, true_p));
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

// Runs trials on a worker pool; results are stored by trial index so output does not depend on scheduling.
inline run_report run(const sim_config& cfg, allocator_kind alloc, int trials, int threads = 0) {
  cfg.validate();
  if (trials < 0) throw config_error("trials must be >= 0");
  run_report rep;
  rep.cfg = cfg;
  rep.alloc = alloc;
  rep.trials = trials;
  rep.results.resize(trials);
  int workers = std::max(1, std::min(threads > 0 ? threads : detail::env_threads(), trials));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < trials; i = next++) rep.results[i] = run_trial(cfg, alloc, i, i == 0);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rep;
}

struct phase_summary {
  long slots = 0;
  long satisfied = 0;
  long infeasible = 0;
  long infinite_delay = 0;
  long over = 0;
  double over_delay_sum = 0.0;
  double throughput_sum = 0.0;
  std::vector<long> link_slots;
  std::vector<long> link_satisfied;
  std::vector<double> delays_ms;  // finite delays only
  std::vector<double> throughputs_mbps;

  std::optional<double> satisfaction() const {
    if (!slots) return std::nullopt;
    return static_cast<double>(satisfied) / slots;
  }
  std::optional<double> mean_throughput_mbps() const {
    if (!slots) return std::nullopt;
    return throughput_sum / slots;
  }
  // Mean delay over slots with delay above the requirement; infinite delays are excluded.
  std::optional<double> conditional_mean_delay_ms() const {
    if (!over) return std::nullopt;
    return over_delay_sum / over;
  }
  std::vector<std::optional<double>> link_satisfaction() const {
    std::vector<std::optional<double>> v;
    for (std::size_t i = 0; i < link_slots.size(); ++i)
      v.push_back(link_slots[i] ? std::optional<double>(static_cast<double>(link_satisfied[i]) / link_slots[i])
                                : std::nullopt);
    return v;
  }
};

struct run_summary {
  phase_summary absorption;
  phase_summary adaptation;
  int completed = 0;
  std::vector<std::pair<int, std::string>> partial;
  std::vector<double> ise;
  std::vector<double> lambda_y;
  std::vector<double> j_trace;              // mean over completed trials, per adaptation slot
  std::vector<double> satisfaction_trace;   // per epoch slot, both phases
  long clamped = 0;
  long prop1_violations = 0;
  long negative_variance_fits = 0;
};

inline run_summary summarize(const run_report& rep) {
  run_summary s;
  const auto& cfg = rep.cfg;
  const int M = cfg.num_pairs;
  const int epoch = cfg.absorption_len + cfg.adaptation_len;
  for (auto* p : {&s.absorption, &s.adaptation}) {
    p->link_slots.assign(M, 0);
    p->link_satisfied.assign(M, 0);
  }
  std::vector<long> trace_n(epoch, 0), trace_sat(epoch, 0);
  std::vector<double> j_sum(cfg.adaptation_len, 0.0);
  for (const auto& r : rep.results) {
    if (!r.ok) {
      s.partial.emplace_back(r.trial, r.error);
      continue;
    }
    ++s.completed;
    for (const auto& rec : r.log) {
      auto& p = rec.ph == phase::absorption ? s.absorption : s.adaptation;
      ++p.slots;
      p.satisfied += rec.satisfied;
      p.infeasible += rec.infeasible;
      p.throughput_sum += rec.throughput / 1e6;
      p.throughputs_mbps.push_back(rec.throughput / 1e6);
      ++p.link_slots[rec.pair];
      p.link_satisfied[rec.pair] += rec.satisfied;
      if (std::isinf(rec.delay)) {
        ++p.infinite_delay;
      } else {
        p.delays_ms.push_back(rec.delay * 1e3);
        if (rec.delay > cfg.delay_req) {
          ++p.over;
          p.over_delay_sum += rec.delay * 1e3;
        }
      }
      ++trace_n[rec.slot];
      trace_sat[rec.slot] += rec.satisfied;
    }
    s.ise.insert(s.ise.end(), r.ise.begin(), r.ise.end());
    s.lambda_y.insert(s.lambda_y.end(), r.lambda_y.begin(), r.lambda_y.end());
    for (std::size_t t = 0; t < r.j_trace.size(); ++t) j_sum[t] += r.j_trace[t];
    s.clamped += r.clamped;
    s.prop1_violations += r.prop1_violations;
    s.negative_variance_fits += r.negative_variance_fits;
  }
  if (s.completed) {
    for (double v : j_sum) s.j_trace.push_back(v / s.completed);
    for (int t = 0; t < epoch; ++t)
      s.satisfaction_trace.push_back(trace_n[t] ? static_cast<double>(trace_sat[t]) / trace_n[t] : 0.0);
  }
  return s;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline nlohmann::json opt(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline nlohmann::json opt_stat(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json phase_json(const phase_summary& p) {
  nlohmann::json j;
  j["slots"] = p.slots;
  j["v2v_satisfaction"] = opt(p.satisfaction());
  j["mean_throughput_mbps"] = opt(p.mean_throughput_mbps());
  if (auto c = p.conditional_mean_delay_ms()) j["conditional_mean_delay_ms"] = *c;
  j["infeasible_slots"] = p.infeasible;
  j["infinite_delays"] = p.infinite_delay;
  nlohmann::json links = nlohmann::json::array();
  for (auto v : p.link_satisfaction()) links.push_back(opt(v));
  j["per_link_satisfaction"] = links;
  return j;
}

inline void write_table(const std::filesystem::path& path, const std::string& header,
                        const std::vector<std::vector<double>>& cols) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << header << '\n';
  std::size_t rows = cols.empty() ? 0 : cols.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << fmt(cols[c][i]);
    os << '\n';
  }
}

}  // namespace detail

inline constexpr const char* csv_header =
    "slot,phase,pair,p_v_mw,p_i_mw,delay_ms,throughput_mbps,satisfied,infeasible";

// Per-slot records of completed trials. slot is global: trial * epoch_length + epoch slot.
inline void write_csv(std::ostream& os, const run_report& rep) {
  os << csv_header << '\n';
  const long epoch = rep.cfg.absorption_len + rep.cfg.adaptation_len;
  char buf[256];
  for (const auto& r : rep.results) {
    if (!r.ok) continue;
    for (const auto& rec : r.log) {
      double d = std::isinf(rec.delay) ? -1.0 : rec.delay * 1e3;
      std::snprintf(buf, sizeof buf, "%ld,%s,%d,%.6f,%.6f,%.9g,%.9g,%d,%d\n", r.trial * epoch + rec.slot,
                    rec.ph == phase::absorption ? "absorption" : "adaptation", rec.pair, rec.p_v, rec.p_i, d,
                    rec.throughput / 1e6, rec.satisfied ? 1 : 0, rec.infeasible ? 1 : 0);
      os << buf;
    }
  }
}

inline nlohmann::json summary_json(const run_report& rep, const run_summary& s) {
  nlohmann::json j;
  j["allocator"] = allocator_name(rep.alloc);
  j["trials"] = rep.trials;
  j["completed_trials"] = s.completed;
  nlohmann::json partial = nlohmann::json::array();
  for (const auto& [t, e] : s.partial) partial.push_back({{"trial", t}, {"cause", e}});
  j["partial_trials"] = partial;
  j["seed"] = rep.cfg.rng_seed;
  j["v2v_satisfaction"] = detail::opt(s.adaptation.satisfaction());
  j["mean_throughput_mbps"] = detail::opt(s.adaptation.mean_throughput_mbps());
  if (auto c = s.adaptation.conditional_mean_delay_ms()) j["conditional_mean_delay_ms"] = *c;
  j["absorption"] = detail::phase_json(s.absorption);
  j["adaptation"] = detail::phase_json(s.adaptation);
  j["mean_ise"] = detail::opt_stat(mean(s.ise));
  j["median_ise"] = detail::opt_stat(median(s.ise));
  j["median_lambda_y"] = detail::opt_stat(median(s.lambda_y));
  j["mean_j"] = detail::opt_stat(mean(s.j_trace));
  j["clamped_slots"] = s.clamped;
  j["monotonicity_check_failures"] = s.prop1_violations;
  j["floored_variance_fits"] = s.negative_variance_fits;
  return j;
}

// Writes per_slot.csv, summary.json and the plot tables into dir.
inline void emit(const run_report& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  auto s = summarize(rep);
  {
    std::ofstream os(dir / "per_slot.csv");
    if (!os) throw std::runtime_error("cannot write '" + (dir / "per_slot.csv").string() + "'");
    write_csv(os, rep);
  }
  {
    std::ofstream os(dir / "summary.json");
    if (!os) throw std::runtime_error("cannot write '" + (dir / "summary.json").string() + "'");
    os << summary_json(rep, s).dump(2) << '\n';
  }
  auto dgrid = linear_grid(0.0, 4.0 * rep.cfg.delay_req * 1e3, 481);
  auto tgrid = linear_grid(0.0, 100.0, 401);
  // infinite delays never fall below a grid point, so scale by the finite share
  auto delay_cdf = [&](phase_summary& p) {
    auto c = ecdf_on_grid(p.delays_ms, dgrid);
    double share = p.slots ? static_cast<double>(p.delays_ms.size()) / p.slots : 0.0;
    for (double& v : c) v *= share;
    return c;
  };
  auto ca = delay_cdf(s.absorption), cd = delay_cdf(s.adaptation);
  std::vector<double> qa(ca.size()), qd(cd.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    qa[i] = 1.0 - ca[i];
    qd[i] = 1.0 - cd[i];
  }
  detail::write_table(dir / "delay_cdf.csv", "delay_ms,absorption,adaptation", {dgrid, ca, cd});
  detail::write_table(dir / "delay_ccdf.csv", "delay_ms,absorption,adaptation", {dgrid, qa, qd});
  detail::write_table(dir / "throughput_cdf.csv", "throughput_mbps,absorption,adaptation",
                      {tgrid, ecdf_on_grid(s.absorption.throughputs_mbps, tgrid),
                       ecdf_on_grid(s.adaptation.throughputs_mbps, tgrid)});
  std::vector<double> slots(s.satisfaction_trace.size());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<double>(i);
  detail::write_table(dir / "satisfaction_trace.csv", "slot,satisfaction", {slots, s.satisfaction_trace});
  std::vector<double> jslots(s.j_trace.size());
  for (std::size_t i = 0; i < jslots.size(); ++i) jslots[i] = static_cast<double>(i);
  detail::write_table(dir / "j_trace.csv", "adaptation_slot,j", {jslots, s.j_trace});
  const pdf_curves* pc = nullptr;
  for (const auto& r : rep.results)
    if (r.ok && r.curves) pc = &*r.curves;
  if (pc) detail::write_table(dir / "pdf_curves.csv", "e,true_pdf,best_estimate,worst_estimate",
                              {pc->grid, pc->truth, pc->best, pc->worst});
  else detail::write_table(dir / "pdf_curves.csv", "e,true_pdf,best_estimate,worst_estimate", {});
}

}  // namespace rv2x
