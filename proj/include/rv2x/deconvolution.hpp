#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace rv2x {

struct deconv_estimate {
  std::vector<double> z;
  double lambda_y = 1.0;
  double k = 10.0;
  double p_i_a = 0.0;
  double p_v_a = 0.0;

  void validate() const {
    if (z.empty()) throw std::invalid_argument("deconv_estimate: empty sample set");
    if (!(lambda_y > 0.0)) throw std::invalid_argument("deconv_estimate: lambda_y must be positive");
    if (!(k > 0.0)) throw std::invalid_argument("deconv_estimate: K must be positive");
  }
};

// Truncated inverse-Fourier kernel: (1/2pi) * int_{-W}^{W} e^{-jwa} (1 + jw/lambda) dw.
inline double deconv_kernel(double a, double w_cut, double lambda) {
  double y = w_cut * a;
  double even, odd;
  if (std::abs(y) < 1e-3) {
    double y2 = y * y;
    even = 2.0 * w_cut * (1.0 - y2 / 6.0 + y2 * y2 / 120.0);
    odd = w_cut * w_cut * (-y / 3.0 + y * y2 / 30.0);
  } else {
    even = 2.0 * std::sin(y) / a;
    odd = (y * std::cos(y) - std::sin(y)) / (a * a);
  }
  return (even - 2.0 * odd / lambda) / (2.0 * std::numbers::pi);
}

// Raw estimator; may be locally negative.
inline double estimate_pdf(const deconv_estimate& est, double e) {
  if (est.z.empty()) throw std::invalid_argument("estimate_pdf: empty sample set");
  double w = est.k * std::numbers::pi, s = 0.0;
  for (double zk : est.z) s += deconv_kernel(zk - e, w, est.lambda_y);
  return s / static_cast<double>(est.z.size());
}

inline std::vector<double> estimate_pdf(const deconv_estimate& est, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double e : grid) out.push_back(estimate_pdf(est, e));
  return out;
}

// Negative parts clipped, renormalized on a uniform grid; supports inverse-CDF sampling.
class clipped_density {
 public:
  clipped_density(const deconv_estimate& est, double lo, double hi, int points = 4001) {
    if (est.z.empty()) throw std::invalid_argument("clipped_density: empty sample set");
    if (!(hi > lo) || points < 3) throw std::invalid_argument("clipped_density: bad grid");
    step_ = (hi - lo) / (points - 1);
    lo_ = lo;
    pdf_.resize(points);
    for (int i = 0; i < points; ++i) pdf_[i] = std::max(0.0, estimate_pdf(est, lo + i * step_));
    cdf_.assign(points, 0.0);
    for (int i = 1; i < points; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * step_ * (pdf_[i] + pdf_[i - 1]);
    double total = cdf_.back();
    if (!(total > 0.0)) throw std::runtime_error("clipped_density: zero mass");
    for (auto& v : pdf_) v /= total;
    for (auto& v : cdf_) v /= total;
  }

  double pdf(double e) const {
    double t = (e - lo_) / step_;
    if (t < 0.0 || t > pdf_.size() - 1) return 0.0;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), pdf_.size() - 2);
    double f = t - i;
    return pdf_[i] * (1 - f) + pdf_[i + 1] * f;
  }

  double quantile(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return lo_;
    if (it == cdf_.end()) return lo_ + step_ * (cdf_.size() - 1);
    std::size_t i = it - cdf_.begin();
    double c0 = cdf_[i - 1], c1 = cdf_[i];
    double f = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return lo_ + step_ * (i - 1 + f);
  }

 private:
  double lo_ = 0.0, step_ = 1.0;
  std::vector<double> pdf_, cdf_;
};

inline void write_estimate(std::ostream& os, const deconv_estimate& est) {
  os.precision(17);
  os << "deconv 1 " << est.z.size() << ' ' << est.lambda_y << ' ' << est.k << ' ' << est.p_i_a << ' ' << est.p_v_a
     << '\n';
  for (double v : est.z) os << v << '\n';
}

inline deconv_estimate read_estimate(std::istream& is) {
  std::string tag;
  int version = 0;
  std::size_t n = 0;
  deconv_estimate est;
  if (!(is >> tag >> version >> n >> est.lambda_y >> est.k >> est.p_i_a >> est.p_v_a) || tag != "deconv" || version != 1)
    throw std::runtime_error("read_estimate: bad header");
  est.z.resize(n);
  for (auto& v : est.z)
    if (!(is >> v)) throw std::runtime_error("read_estimate: truncated sample list");
  return est;
}

// Empirical factor chi(w) = (1/T) sum_k e^{jwz_k} (1 - jw/lambda) on K15 nodes of
// dyadic panel levels over [0, W], built lazily.
class empirical_cf {
 public:
  static constexpr int max_level = 13;

  empirical_cf(const deconv_estimate& est, double w_cut) : z_(est.z), lambda_(est.lambda_y), w_(w_cut) {
    est.validate();
    auto [lo, hi] = std::minmax_element(z_.begin(), z_.end());
    zmin_ = *lo;
    zmax_ = *hi;
    levels_.resize(max_level + 1);
  }

  double w_cut() const { return w_; }
  double zmin() const { return zmin_; }
  double zmax() const { return zmax_; }
  double lambda() const { return lambda_; }

  const std::vector<std::complex<double>>& level(int l) {
    if (l < 0 || l > max_level) throw quadrature_error("empirical_cf: level out of range");
    auto& v = levels_[l];
    if (v.empty()) build(l, v);
    return v;
  }

 private:
  void build(int l, std::vector<std::complex<double>>& out) const {
    using g = gauss_kronrod15;
    const int panels = 1 << l;
    const double h = w_ / panels;
    const std::size_t n = static_cast<std::size_t>(panels) * 15;
    std::vector<double> re(n, 0.0), im(n, 0.0);
    std::array<double, 15> t, br, bi;
    for (int j = 0; j < 15; ++j) t[j] = 0.5 * h * (1.0 + g::node(j));
    for (double zk : z_) {
      for (int j = 0; j < 15; ++j) {
        br[j] = std::cos(t[j] * zk);
        bi[j] = std::sin(t[j] * zk);
      }
      const double sr = std::cos(h * zk), si = std::sin(h * zk);
      double cr = 1.0, ci = 0.0;
      double* pr = re.data();
      double* pi = im.data();
      for (int p = 0; p < panels; ++p, pr += 15, pi += 15) {
        for (int j = 0; j < 15; ++j) {
          pr[j] += cr * br[j] - ci * bi[j];
          pi[j] += cr * bi[j] + ci * br[j];
        }
        double nr = cr * sr - ci * si;
        ci = cr * si + ci * sr;
        cr = nr;
      }
    }
    const double inv_t = 1.0 / static_cast<double>(z_.size());
    out.resize(n);
    for (int p = 0; p < panels; ++p)
      for (int j = 0; j < 15; ++j) {
        std::size_t i = static_cast<std::size_t>(p) * 15 + j;
        double w = p * h + t[j];
        double a = re[i] * inv_t, b = im[i] * inv_t, q = -w / lambda_;
        out[i] = {a - b * q, b + a * q};
      }
  }

  std::vector<double> z_;
  double lambda_, w_;
  double zmin_ = 0.0, zmax_ = 0.0;
  std::vector<std::vector<std::complex<double>>> levels_;
};

}  // namespace rv2x
