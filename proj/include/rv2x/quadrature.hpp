#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "errors.hpp"

namespace rv2x {

struct gauss_kronrod15 {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  // Node offset in [-1, 1] and weights for position j = 0..14, left to right.
  static constexpr double node(int j) { return j < 7 ? -xgk[j] : (j == 7 ? 0.0 : xgk[14 - j]); }
  static constexpr double kronrod_weight(int j) { return j <= 7 ? wgk[j] : wgk[14 - j]; }
  static constexpr double gauss_weight(int j) {
    int i = j <= 7 ? j : 14 - j;
    return (i % 2 == 1) ? wg[i / 2] : 0.0;
  }
};

struct quad_result {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

// QUADPACK-style error estimate for one panel.
inline double gk_panel_error(double kron, double gauss, double resasc) {
  double err = std::abs(kron - gauss);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return err;
}

template <class F>
quad_result gk15_panel(F&& f, double a, double b) {
  using g = gauss_kronrod15;
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<double, 15> fv;
  double k = 0.0, gs = 0.0;
  for (int j = 0; j < 15; ++j) {
    fv[j] = f(c + h * g::node(j));
    k += g::kronrod_weight(j) * fv[j];
    gs += g::gauss_weight(j) * fv[j];
  }
  double mean = k * 0.5, asc = 0.0;
  for (int j = 0; j < 15; ++j) asc += g::kronrod_weight(j) * std::abs(fv[j] - mean);
  return {k * h, gk_panel_error(k * h, gs * h, asc * std::abs(h)), 1};
}

// Globally adaptive Gauss-Kronrod integration on [a, b].
template <class F>
quad_result integrate(F&& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-10,
                      int max_panels = 20000) {
  struct panel {
    double a, b, v, e;
    bool operator<(const panel& o) const { return e < o.e; }
  };
  std::priority_queue<panel> heap;
  auto first = gk15_panel(f, a, b);
  heap.push({a, b, first.value, first.error});
  double total = first.value, err = first.error;
  int count = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (count >= max_panels) throw quadrature_error("integrate: panel budget exhausted");
    panel p = heap.top();
    heap.pop();
    double m = 0.5 * (p.a + p.b);
    auto l = gk15_panel(f, p.a, m);
    auto r = gk15_panel(f, m, p.b);
    total += l.value + r.value - p.v;
    err += l.error + r.error - p.e;
    heap.push({p.a, m, l.value, l.error});
    heap.push({m, p.b, r.value, r.error});
    ++count;
  }
  // Re-sum to drop accumulated round-off from the running totals.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().v;
    e += heap.top().e;
    heap.pop();
  }
  return {v, e, count + 1};
}

// Integral over [a, inf) via x = a + t/(1-t).
template <class F>
quad_result integrate_to_inf(F&& f, double a, double abs_tol = 1e-10, double rel_tol = 1e-10) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    double u = 1.0 - t;
    return f(a + t / u) / (u * u);
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

template <class F>
quad_result integrate_real_line(F&& f, double abs_tol = 1e-10, double rel_tol = 1e-10) {
  auto r = integrate_to_inf(f, 0.0, abs_tol, rel_tol);
  auto l = integrate_to_inf([&](double x) { return f(-x); }, 0.0, abs_tol, rel_tol);
  return {r.value + l.value, r.error + l.error, r.panels + l.panels};
}

}  // namespace rv2x
