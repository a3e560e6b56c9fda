#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace rv2x {

inline constexpr double speed_of_light = 299792458.0;

// WINNER+ B1 (urban micro street canyon) coefficient set.
struct winner_b1 {
  static constexpr double los_slope = 22.7;
  static constexpr double los_intercept = 41.0;
  static constexpr double los_freq = 20.0;
  static constexpr double far_slope = 40.0;
  static constexpr double far_intercept = 9.45;
  static constexpr double far_height = 17.3;
  static constexpr double far_freq = 2.7;
  static constexpr double env_height = 1.0;
  static constexpr double nlos_offset = 20.0;
  static constexpr double nlos_nj0 = 2.8;
  static constexpr double nlos_nj_slope = 0.0024;
  static constexpr double nlos_nj_min = 1.84;
  static constexpr double nlos_freq = 3.0;
  static constexpr double min_los_distance = 3.0;
  static constexpr double min_nlos_distance = 10.0;
};

inline double pathloss_v2i_db(double distance_km) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("pathloss_v2i_db: distance must be positive");
  return 128.1 + 37.6 * std::log10(distance_km);
}

inline double b1_los_db(double d, double fc_hz, double h1 = 1.5, double h2 = 1.5) {
  using k = winner_b1;
  double fc_ghz = fc_hz / 1e9;
  d = std::max(d, k::min_los_distance);
  double h1e = h1 - k::env_height, h2e = h2 - k::env_height;
  double d_bp = 4.0 * h1e * h2e * fc_hz / speed_of_light;
  if (d < d_bp) return k::los_slope * std::log10(d) + k::los_intercept + k::los_freq * std::log10(fc_ghz / 5.0);
  return k::far_slope * std::log10(d) + k::far_intercept - k::far_height * std::log10(h1e) -
         k::far_height * std::log10(h2e) + k::far_freq * std::log10(fc_ghz / 5.0);
}

// Manhattan NLOS: d1 along the first street, d2 along the perpendicular one.
inline double b1_nlos_db(double d1, double d2, double fc_hz, double h1 = 1.5, double h2 = 1.5) {
  using k = winner_b1;
  double fc_ghz = fc_hz / 1e9;
  auto one = [&](double a, double b) {
    a = std::max(a, k::min_nlos_distance);
    b = std::max(b, k::min_nlos_distance);
    double nj = std::max(k::nlos_nj0 - k::nlos_nj_slope * a, k::nlos_nj_min);
    return b1_los_db(a, fc_hz, h1, h2) + k::nlos_offset - 12.5 * nj + 10.0 * nj * std::log10(b) +
           k::nlos_freq * std::log10(fc_ghz / 5.0);
  };
  return std::min(one(d1, d2), one(d2, d1));
}

inline double pathloss_winner_b1_db(double distance_m, bool los, double fc_hz) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss_winner_b1_db: distance must be positive");
  if (los) return b1_los_db(distance_m, fc_hz);
  double leg = distance_m / std::numbers::sqrt2;
  return b1_nlos_db(leg, leg, fc_hz);
}

}  // namespace rv2x
