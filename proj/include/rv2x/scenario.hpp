#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "config.hpp"
#include "random.hpp"

namespace rv2x {

struct point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(point a, point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct topology {
  point rsu;
  std::vector<point> v2v_tx;
  std::vector<point> v2v_rx;
  std::vector<point> v2i_tx;

  double v2v_distance(int m) const { return distance(v2v_tx[m], v2v_rx[m]); }
};

// Noise power over the band in mW.
inline double noise_power(const sim_config& c) {
  return std::pow(10.0, (c.noise_psd + 10.0 * std::log10(c.bandwidth)) / 10.0);
}

struct qos_constants {
  double gamma_v = 0.0;
  double d_v = 0.0;
};

inline qos_constants make_qos_constants(double packet_size, double bandwidth, double delay_req) {
  double e = packet_size / (bandwidth * delay_req);
  double p = std::exp2(e);
  return {p - 1.0, std::numbers::ln2 * packet_size * p / (bandwidth * delay_req * delay_req)};
}

inline qos_constants make_qos_constants(const sim_config& c) {
  return make_qos_constants(c.packet_size, c.bandwidth, c.delay_req);
}

namespace detail {

struct street_point {
  bool horizontal;
  double fixed;  // y of a horizontal street, x of a vertical one
  double along;
  point pos() const { return horizontal ? point{along, fixed} : point{fixed, along}; }
};

inline street_point random_street_point(const sim_config& c, random_stream& rng) {
  int n_streets = static_cast<int>(std::floor(c.area_side / c.street_spacing + 1e-9)) + 1;
  bool horizontal = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
  int k = std::uniform_int_distribution<int>(0, n_streets - 1)(rng);
  double along = std::uniform_real_distribution<double>(0.0, c.area_side)(rng);
  return {horizontal, k * c.street_spacing, along};
}

inline street_point offset_on_street(const sim_config& c, street_point p, double offset) {
  double a = p.along + offset;
  if (a < 0.0 || a > c.area_side) a = p.along - offset;
  p.along = std::clamp(a, 0.0, c.area_side);
  return p;
}

}  // namespace detail

// Manhattan grid placement, frozen for one large-scale epoch.
inline topology build_topology(const sim_config& c, random_stream& rng) {
  topology t;
  t.rsu = {c.area_side / 2.0, c.area_side / 2.0};
  std::uniform_real_distribution<double> link_len(60.0, 80.0);
  std::vector<detail::street_point> rx;
  for (int m = 0; m < c.num_pairs; ++m) {
    auto tx = detail::random_street_point(c, rng);
    double d = link_len(rng);
    double dir = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? 1.0 : -1.0;
    auto r = detail::offset_on_street(c, tx, dir * d);
    t.v2v_tx.push_back(tx.pos());
    t.v2v_rx.push_back(r.pos());
    rx.push_back(r);
  }
  for (int n = 0; n < c.num_pairs; ++n) {
    if (c.placement == v2i_placement::uniform) {
      t.v2i_tx.push_back(detail::random_street_point(c, rng).pos());
    } else {
      double off = std::uniform_real_distribution<double>(-c.cluster_radius, c.cluster_radius)(rng);
      t.v2i_tx.push_back(detail::offset_on_street(c, rx[n], off).pos());
    }
  }
  return t;
}

}  // namespace rv2x
