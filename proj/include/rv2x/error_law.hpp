#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

namespace rv2x {

struct mixture_component {
  double mean = 0.0;
  double variance = 1.0;
  double weight = 1.0;
};

// Hidden law of the additive interference-CSI error e_nm.
class error_distribution {
 public:
  error_distribution() = default;
  explicit error_distribution(std::vector<mixture_component> comps) : comps_(std::move(comps)) {
    validate();
  }

  static error_distribution type1() { return error_distribution({{0.2, 0.04, 0.5}, {0.8, 0.02, 0.5}}); }
  static error_distribution type2() { return error_distribution({{0.4, 0.02, 0.4}, {0.6, 0.04, 0.6}}); }
  static error_distribution gaussian(double mean, double variance) {
    return error_distribution({{mean, variance, 1.0}});
  }

  const std::vector<mixture_component>& components() const { return comps_; }
  bool empty() const { return comps_.empty(); }

  double pdf(double x) const {
    double s = 0.0;
    for (const auto& c : comps_) {
      double z = (x - c.mean);
      s += c.weight * std::exp(-0.5 * z * z / c.variance) / std::sqrt(2.0 * std::numbers::pi * c.variance);
    }
    return s;
  }

  double cdf(double x) const {
    double s = 0.0;
    for (const auto& c : comps_) s += c.weight * normal_cdf((x - c.mean) / std::sqrt(c.variance));
    return s;
  }

  double mean() const {
    double m = 0.0;
    for (const auto& c : comps_) m += c.weight * c.mean;
    return m;
  }

  double variance() const {
    double m = mean(), s = 0.0;
    for (const auto& c : comps_) s += c.weight * (c.variance + (c.mean - m) * (c.mean - m));
    return s;
  }

  template <class Rng>
  double sample(Rng& rng) const {
    std::size_t k = 0;
    if (comps_.size() > 1) {
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      double acc = 0.0;
      for (k = 0; k + 1 < comps_.size(); ++k) {
        acc += comps_[k].weight;
        if (u < acc) break;
      }
    }
    const auto& c = comps_[k];
    return c.mean + std::sqrt(c.variance) * std::normal_distribution<double>(0.0, 1.0)(rng);
  }

 private:
  void validate() const {
    if (comps_.empty()) throw config_error("error law: no components");
    double w = 0.0;
    for (const auto& c : comps_) {
      if (!(c.variance > 0.0)) throw config_error("error law: variance must be positive");
      if (!(c.weight >= 0.0)) throw config_error("error law: negative weight");
      w += c.weight;
    }
    if (std::abs(w - 1.0) > 1e-9) throw config_error("error law: weights must sum to 1");
  }

  std::vector<mixture_component> comps_;
};

}  // namespace rv2x
