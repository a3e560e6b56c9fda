#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "config.hpp"
#include "error_law.hpp"
#include "pathloss.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "special.hpp"

namespace rv2x {

inline double doppler_coefficient(double speed, double fc_hz, double delta_t) {
  if (speed < 0.0 || fc_hz < 0.0 || delta_t < 0.0) throw std::invalid_argument("doppler_coefficient: negative input");
  double fd = speed * fc_hz / speed_of_light;
  return bessel_j0(2.0 * std::numbers::pi * fd * delta_t);
}

// Linear large-scale gains for one epoch. Pair matrices are row-major [m * N + n].
struct large_scale_state {
  int m = 0;
  int n = 0;
  std::vector<double> l_i;    // V2I n -> RSU
  std::vector<double> l_v;    // V2V m direct
  std::vector<double> l_inm;  // V2I tx n -> V2V rx m
  std::vector<double> l_vmn;  // V2V tx m -> RSU on RB n
  std::vector<double> delta;  // per V2V link
  int epoch = 0;

  double inm(int mm, int nn) const { return l_inm[mm * n + nn]; }
  double vmn(int mm, int nn) const { return l_vmn[mm * n + nn]; }
};

inline large_scale_state draw_large_scale(const sim_config& c, const topology& t, random_stream& rng, int epoch = 0) {
  const int M = c.num_pairs, N = c.num_pairs;
  large_scale_state s;
  s.m = M;
  s.n = N;
  s.epoch = epoch;
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gain = [&](double pl_db, double shadow_std) { return db_to_linear(-pl_db + shadow_std * gauss(rng)); };
  auto manhattan_nlos = [&](point a, point b, double h1, double h2) {
    return b1_nlos_db(std::abs(a.x - b.x), std::abs(a.y - b.y), c.carrier_freq, h1, h2);
  };
  double hv = c.vehicle_height;
  for (int nn = 0; nn < N; ++nn) {
    double dh = c.rsu_height - hv;
    double d = std::sqrt(std::pow(distance(t.v2i_tx[nn], t.rsu), 2) + dh * dh);
    s.l_i.push_back(gain(pathloss_v2i_db(d / 1000.0), c.shadow_v2i));
  }
  for (int mm = 0; mm < M; ++mm)
    s.l_v.push_back(gain(b1_los_db(t.v2v_distance(mm), c.carrier_freq, hv, hv), c.shadow_v2v));
  s.l_inm.resize(M * N);
  for (int mm = 0; mm < M; ++mm)
    for (int nn = 0; nn < N; ++nn)
      s.l_inm[mm * N + nn] = gain(manhattan_nlos(t.v2i_tx[nn], t.v2v_rx[mm], hv, hv), c.shadow_i2v);
  s.l_vmn.resize(M * N);
  for (int mm = 0; mm < M; ++mm) {
    double g = gain(manhattan_nlos(t.v2v_tx[mm], t.rsu, hv, c.rsu_height), c.shadow_v2rsu);
    for (int nn = 0; nn < N; ++nn) s.l_vmn[mm * N + nn] = g;
  }
  double d = doppler_coefficient(c.speed, c.carrier_freq, c.feedback_delay);
  s.delta.assign(M, d);
  return s;
}

// Squared small-scale gains for one slot. Pair matrices are row-major [m * N + n].
struct channel_state {
  int slot = 0;
  int m = 0;
  int n = 0;
  std::vector<double> hat_gi;    // |g^I_n|^2, reported == true
  std::vector<double> hat_gvmn;  // |g^V_mn|^2, reported == true
  std::vector<double> hat_gv;
  std::vector<double> hat_ginm;
  std::vector<double> gv;
  std::vector<double> ginm;  // may be negative
  std::vector<double> em2;
  std::vector<double> enm;

  double gi(int nn) const { return hat_gi[nn]; }
  double gvmn(int mm, int nn) const { return hat_gvmn[mm * n + nn]; }
  double ginm_at(int mm, int nn) const { return ginm[mm * n + nn]; }
  double hat_ginm_at(int mm, int nn) const { return hat_ginm[mm * n + nn]; }
  double enm_at(int mm, int nn) const { return enm[mm * n + nn]; }
};

template <class Rng>
double unit_cn_power(Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  double re = g(rng), im = g(rng);
  return re * re + im * im;
}

// Per-trial fading streams, one per link.
struct fading_streams {
  std::vector<random_stream> v2v;
  std::vector<random_stream> v2i;

  fading_streams(std::uint64_t seed, std::uint64_t trial, int m, int n) {
    for (int k = 0; k < m; ++k) v2v.push_back(make_stream(seed, trial, k, purpose::v2v_fading));
    for (int k = 0; k < n; ++k) v2i.push_back(make_stream(seed, trial, k, purpose::v2i_fading));
  }
};

// Draws the next slot. Slots are i.i.d.; prev only supplies the slot index.
inline channel_state evolve_small_scale(const channel_state& prev, const large_scale_state& large,
                                        const error_distribution& law, fading_streams& rng) {
  const int M = large.m, N = large.n;
  channel_state s;
  s.slot = prev.slot + 1;
  s.m = M;
  s.n = N;
  s.hat_gi.resize(N);
  s.hat_gvmn.resize(M * N);
  s.hat_gv.resize(M);
  s.gv.resize(M);
  s.em2.resize(M);
  s.hat_ginm.resize(M * N);
  s.ginm.resize(M * N);
  s.enm.resize(M * N);
  std::exponential_distribution<double> exp1(1.0);
  for (int mm = 0; mm < M; ++mm) {
    auto& r = rng.v2v[mm];
    double d2 = large.delta[mm] * large.delta[mm];
    double hat = unit_cn_power(r);
    double e = exp1(r);
    s.hat_gv[mm] = hat;
    s.em2[mm] = e;
    s.gv[mm] = hat + (1.0 - d2) * (e - hat);
    for (int nn = 0; nn < N; ++nn) {
      double h = unit_cn_power(r);
      double err = law.sample(r);
      s.hat_ginm[mm * N + nn] = h;
      s.enm[mm * N + nn] = err;
      s.ginm[mm * N + nn] = h + err;
    }
  }
  for (int nn = 0; nn < N; ++nn) {
    auto& r = rng.v2i[nn];
    s.hat_gi[nn] = unit_cn_power(r);
    for (int mm = 0; mm < M; ++mm) s.hat_gvmn[mm * N + nn] = unit_cn_power(r);
  }
  return s;
}

inline channel_state initial_channel_state(int m, int n) {
  channel_state s;
  s.slot = -1;
  s.m = m;
  s.n = n;
  return s;
}

}  // namespace rv2x
