#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error_law.hpp"
#include "errors.hpp"

namespace rv2x {

struct power_box {
  double pv_min = 10.0;
  double pv_max = 200.0;
  double pi_min = 10.0;
  double pi_max = 200.0;
};

enum class v2i_placement { uniform, clustered };
enum class gaussian_mode { refit, zero_mean };

struct sim_config {
  int num_pairs = 10;
  double area_side = 400.0;
  double street_spacing = 100.0;
  v2i_placement placement = v2i_placement::clustered;
  double cluster_radius = 25.0;
  double rsu_height = 25.0;
  double vehicle_height = 1.5;

  double bandwidth = 2e6;
  double carrier_freq = 5.9e9;
  double feedback_delay = 1e-3;
  double speed = 10.0;
  double packet_size = 3200.0;
  double delay_req = 0.015;
  double rate_req = 20e6;
  double prob_req = 0.95;

  double trunc_k = 10.0;
  double trunc_k1 = 10.0;
  double trunc_k2 = 10.0;

  int absorption_len = 1000;
  int matching_horizon = 1200;
  int adaptation_len = 200;

  power_box box;
  double noise_psd = -174.0;
  std::vector<double> hr_weights = std::vector<double>(10, 0.5);
  double pathloss_exponent = 3.0;

  double shadow_v2v = 4.0;
  double shadow_v2i = 8.0;
  double shadow_i2v = 8.0;
  double shadow_v2rsu = 8.0;

  error_distribution error_law = error_distribution::type1();
  gaussian_mode gauss_mode = gaussian_mode::refit;
  double gauss_var_floor = 1e-6;
  bool identity_matching = false;
  bool strict_prop1 = false;
  double quad_tol = 1e-8;

  std::uint64_t rng_seed = 1;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw config_error(std::string(name) + " must be positive");
    };
    if (num_pairs < 1) throw config_error("num_pairs must be >= 1");
    positive(area_side, "area_side");
    positive(street_spacing, "street_spacing");
    if (street_spacing > area_side) throw config_error("street_spacing exceeds area_side");
    if (area_side < 160.0) throw config_error("area_side too small for 80 m V2V links");
    positive(cluster_radius, "cluster_radius");
    positive(rsu_height, "rsu_height");
    positive(vehicle_height, "vehicle_height");
    positive(bandwidth, "bandwidth");
    positive(carrier_freq, "carrier_freq");
    positive(feedback_delay, "feedback_delay");
    positive(speed, "speed");
    positive(packet_size, "packet_size");
    positive(delay_req, "delay_req");
    positive(rate_req, "rate_req");
    if (!(prob_req > 0.0 && prob_req < 1.0)) throw config_error("prob_req must lie in (0,1)");
    positive(trunc_k, "trunc_k");
    positive(trunc_k1, "trunc_k1");
    positive(trunc_k2, "trunc_k2");
    if (absorption_len < 1) throw config_error("absorption_len must be >= 1");
    if (adaptation_len < 0) throw config_error("adaptation_len must be >= 0");
    if (matching_horizon < absorption_len) throw config_error("absorption_len exceeds matching_horizon");
    if (adaptation_len > matching_horizon - absorption_len)
      throw config_error("adaptation_len exceeds matching_horizon - absorption_len");
    positive(box.pv_min, "pv_min");
    positive(box.pi_min, "pi_min");
    if (box.pv_min > box.pv_max) throw config_error("pv_min > pv_max");
    if (box.pi_min > box.pi_max) throw config_error("pi_min > pi_max");
    if (static_cast<int>(hr_weights.size()) != num_pairs) throw config_error("hr_weights size must equal num_pairs");
    for (double l : hr_weights)
      if (!(l >= 0.0 && l <= 1.0)) throw config_error("hr_weights must lie in [0,1]");
    positive(pathloss_exponent, "pathloss_exponent");
    positive(shadow_v2v, "shadow_v2v");
    positive(shadow_v2i, "shadow_v2i");
    positive(shadow_i2v, "shadow_i2v");
    positive(shadow_v2rsu, "shadow_v2rsu");
    positive(gauss_var_floor, "gauss_var_floor");
    positive(quad_tol, "quad_tol");
    if (error_law.empty()) throw config_error("error law missing");
  }
};

namespace detail {

template <class T>
void take(const nlohmann::json& j, const char* key, T& out, int& used) {
  if (auto it = j.find(key); it != j.end()) {
    out = it->get<T>();
    ++used;
  }
}

}  // namespace detail

inline error_distribution parse_error_law(const nlohmann::json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "type1") return error_distribution::type1();
    if (s == "type2") return error_distribution::type2();
    throw config_error("unknown error law '" + s + "'");
  }
  if (!j.is_array()) throw config_error("error_law must be a name or a list of [mean, variance, weight]");
  std::vector<mixture_component> comps;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) throw config_error("error_law entries must be [mean, variance, weight]");
    comps.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
  }
  return error_distribution(std::move(comps));
}

// Flat JSON object, keys mirror sim_config fields. Unknown keys are rejected.
inline sim_config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  sim_config c;
  int used = 0;
  try {
    detail::take(j, "num_pairs", c.num_pairs, used);
    detail::take(j, "area_side", c.area_side, used);
    detail::take(j, "street_spacing", c.street_spacing, used);
    detail::take(j, "cluster_radius", c.cluster_radius, used);
    detail::take(j, "rsu_height", c.rsu_height, used);
    detail::take(j, "vehicle_height", c.vehicle_height, used);
    detail::take(j, "bandwidth", c.bandwidth, used);
    detail::take(j, "carrier_freq", c.carrier_freq, used);
    detail::take(j, "feedback_delay", c.feedback_delay, used);
    detail::take(j, "speed", c.speed, used);
    detail::take(j, "packet_size", c.packet_size, used);
    detail::take(j, "delay_req", c.delay_req, used);
    detail::take(j, "rate_req", c.rate_req, used);
    detail::take(j, "prob_req", c.prob_req, used);
    detail::take(j, "trunc_k", c.trunc_k, used);
    detail::take(j, "trunc_k1", c.trunc_k1, used);
    detail::take(j, "trunc_k2", c.trunc_k2, used);
    detail::take(j, "absorption_len", c.absorption_len, used);
    detail::take(j, "matching_horizon", c.matching_horizon, used);
    detail::take(j, "adaptation_len", c.adaptation_len, used);
    detail::take(j, "pv_min", c.box.pv_min, used);
    detail::take(j, "pv_max", c.box.pv_max, used);
    detail::take(j, "pi_min", c.box.pi_min, used);
    detail::take(j, "pi_max", c.box.pi_max, used);
    detail::take(j, "noise_psd", c.noise_psd, used);
    detail::take(j, "pathloss_exponent", c.pathloss_exponent, used);
    detail::take(j, "shadow_v2v", c.shadow_v2v, used);
    detail::take(j, "shadow_v2i", c.shadow_v2i, used);
    detail::take(j, "shadow_i2v", c.shadow_i2v, used);
    detail::take(j, "shadow_v2rsu", c.shadow_v2rsu, used);
    detail::take(j, "gauss_var_floor", c.gauss_var_floor, used);
    detail::take(j, "identity_matching", c.identity_matching, used);
    detail::take(j, "strict_prop1", c.strict_prop1, used);
    detail::take(j, "quad_tol", c.quad_tol, used);
    detail::take(j, "rng_seed", c.rng_seed, used);
    if (auto it = j.find("hr_weights"); it != j.end()) {
      ++used;
      if (it->is_number()) c.hr_weights.assign(c.num_pairs, it->get<double>());
      else c.hr_weights = it->get<std::vector<double>>();
    } else {
      c.hr_weights.assign(c.num_pairs, c.hr_weights.empty() ? 0.5 : c.hr_weights.front());
    }
    if (auto it = j.find("v2i_placement"); it != j.end()) {
      ++used;
      auto s = it->get<std::string>();
      if (s == "uniform") c.placement = v2i_placement::uniform;
      else if (s == "clustered") c.placement = v2i_placement::clustered;
      else throw config_error("unknown v2i_placement '" + s + "'");
    }
    if (auto it = j.find("gaussian_mode"); it != j.end()) {
      ++used;
      auto s = it->get<std::string>();
      if (s == "refit") c.gauss_mode = gaussian_mode::refit;
      else if (s == "zero_mean") c.gauss_mode = gaussian_mode::zero_mean;
      else throw config_error("unknown gaussian_mode '" + s + "'");
    }
    if (auto it = j.find("error_law"); it != j.end()) {
      ++used;
      c.error_law = parse_error_law(*it);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  if (used != static_cast<int>(j.size())) {
    static const char* known[] = {"num_pairs", "area_side", "street_spacing", "cluster_radius", "rsu_height",
                                  "vehicle_height", "bandwidth", "carrier_freq", "feedback_delay", "speed",
                                  "packet_size", "delay_req", "rate_req", "prob_req", "trunc_k", "trunc_k1",
                                  "trunc_k2", "absorption_len", "matching_horizon", "adaptation_len", "pv_min",
                                  "pv_max", "pi_min", "pi_max", "noise_psd", "pathloss_exponent", "shadow_v2v",
                                  "shadow_v2i", "shadow_i2v", "shadow_v2rsu", "gauss_var_floor",
                                  "identity_matching", "strict_prop1", "quad_tol", "rng_seed", "hr_weights", "v2i_placement",
                                  "gaussian_mode", "error_law"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* k : known) ok = ok || it.key() == k;
      if (!ok) throw config_error("unknown config key '" + it.key() + "'");
    }
  }
  c.validate();
  return c;
}

inline sim_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace rv2x
