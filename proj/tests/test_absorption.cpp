#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rv2x/absorption.hpp"
#include "rv2x/stats.hpp"

using namespace rv2x;

namespace {
template <class F>
double simpson(F f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

deconv_estimate sampled(const error_distribution& law, double lambda, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  deconv_estimate e;
  e.lambda_y = lambda;
  e.k = 10.0;
  for (int i = 0; i < t; ++i) e.z.push_back(law.sample(rng) + ex(rng) / lambda);
  return e;
}
}  // namespace

TEST(Samples, ZeroErrorGivesZero) {
  // true and nominal RSS equal, |g_V|^2 reported as zero
  EXPECT_EQ(collect_sample(5.0, 5.0, 100.0, 1e-9, 20.0, 1e-8, 0.6, 0.0), 0.0);
}

TEST(Samples, BothFormsAgree) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int i = 0; i < 200; ++i) {
    double pi = 100 * u(rng), li = 1e-9 * u(rng), pv = 100 * u(rng), lv = 1e-9 * u(rng), d = 0.9 * u(rng) / 2.0;
    double hat_gv = u(rng), hat_gi = u(rng), enm = u(rng) - 1.0, em2 = u(rng), s2 = 1e-11;
    double gv = d * d * hat_gv + (1 - d * d) * em2;
    double r = pi * li * (hat_gi + enm) + pv * lv * gv + s2;
    double r_hat = pi * li * hat_gi + pv * lv * hat_gv + s2;
    double z = collect_sample(r, r_hat, pi, li, pv, lv, d, hat_gv);
    double second = enm + em2 / lambda_y(pi, li, pv, lv, d);
    EXPECT_NEAR(z, second, 1e-12 * std::max(1.0, std::abs(second)));
  }
}

TEST(Samples, MeanMatchesExponentialLaw) {
  auto e = sampled(error_distribution::gaussian(0.0, 1e-300), 4.0, 100000, 2);
  double m = mean(e.z);
  EXPECT_LT(std::abs(m - 0.25), 3.0 * 0.25 / std::sqrt(1e5));
}

TEST(Kernel, SingleSampleLimit) {
  deconv_estimate e;
  e.z = {0.37};
  e.lambda_y = 3.0;
  e.k = 10.0;
  EXPECT_NEAR(estimate_pdf(e, 0.37), 10.0, 1e-12);
  e.z = {0.37, 5.0, -4.0, 9.0};
  EXPECT_NEAR(estimate_pdf(e, 0.37), 10.0 / 4 + (estimate_pdf(e, 0.37) - 10.0 / 4), 1e-12);
}

TEST(Kernel, MatchesQuadratureOfTruncatedIntegral) {
  const double w = 10.0 * std::numbers::pi;
  for (double lam : {0.5, 3.0, 50.0})
    for (double a : {-2.3, -0.4, -1e-4, 0.0, 2e-5, 0.01, 0.7, 3.1}) {
      double q = simpson([&](double x) { return std::cos(x * a) + x / lam * std::sin(x * a); }, 0.0, w, 200000) /
                 std::numbers::pi;
      EXPECT_NEAR(deconv_kernel(a, w, lam), q, 1e-8) << "a=" << a << " lambda=" << lam;
    }
}

TEST(Kernel, EstimateIntegratesToOne) {
  auto e = sampled(error_distribution::type1(), 5.0, 2000, 3);
  auto grid = linear_grid(-6.0, 7.0, 6001);
  EXPECT_NEAR(trapezoid(grid, estimate_pdf(e, grid)), 1.0, 0.05);
}

TEST(Kernel, IseBelowCalibratedThreshold) {
  auto law = error_distribution::type1();
  auto e = sampled(law, 50.0, 10000, 12345);
  auto grid = linear_grid(-1.0, 2.0, 601);
  auto f = estimate_pdf(e, grid);
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d[i] = std::pow(f[i] - law.pdf(grid[i]), 2);
  // 20-seed pre-run: median 1.0e-3, max 1.7e-3
  EXPECT_LT(trapezoid(grid, d), 3.5e-3);
}

TEST(Kernel, SerializationRoundTrip) {
  auto e = sampled(error_distribution::type2(), 2.5, 50, 4);
  e.p_i_a = 20.0;
  e.p_v_a = 200.0;
  std::stringstream ss;
  write_estimate(ss, e);
  auto r = read_estimate(ss);
  EXPECT_EQ(r.z, e.z);
  EXPECT_EQ(r.lambda_y, e.lambda_y);
  EXPECT_EQ(r.p_v_a, 200.0);
  std::stringstream bad("deconv 2 1 1 1 1 1 0");
  EXPECT_THROW(read_estimate(bad), std::runtime_error);
}

TEST(Kernel, ClippedDensityIsProper) {
  auto e = sampled(error_distribution::type1(), 3.0, 1000, 5);
  clipped_density d(e, -2.0, 3.0);
  auto grid = linear_grid(-2.0, 3.0, 2001);
  std::vector<double> f;
  for (double x : grid) {
    f.push_back(d.pdf(x));
    EXPECT_GE(f.back(), 0.0);
  }
  EXPECT_NEAR(trapezoid(grid, f), 1.0, 1e-3);
  EXPECT_LT(d.quantile(0.1), d.quantile(0.9));
}

TEST(Bound, ReferenceValueAndScaling) {
  double d = std::sqrt(0.4256);
  EXPECT_NEAR(adaptation_capability_bound(d, 1.0, 10.0, 1000), 8.346431551865372, 1e-9);
  EXPECT_NEAR(adaptation_capability_bound(d, 1.0, 10.0, 500), 2.0 * adaptation_capability_bound(d, 1.0, 10.0, 1000),
              1e-12);
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    double b = adaptation_capability_bound(d, 0.1 * i, 10.0, 1000);
    EXPECT_GT(b, prev);
    prev = b;
  }
  EXPECT_THROW(adaptation_capability_bound(1.0, 1.0, 10.0, 1000), std::invalid_argument);
  EXPECT_THROW(adaptation_capability_bound(d, 0.0, 10.0, 1000), std::invalid_argument);
}

TEST(Power, ClosedFormCases) {
  power_box b;
  auto p1 = *absorption_power(0.001, b);
  EXPECT_DOUBLE_EQ(p1.p_i, 200.0);
  EXPECT_DOUBLE_EQ(p1.p_v, 10.0);
  auto p2 = *absorption_power(0.01, b);
  EXPECT_DOUBLE_EQ(p2.p_i, 200.0);
  EXPECT_NEAR(p2.p_v, 40.0, 1e-12);
  auto p3 = *absorption_power(0.5, b);
  EXPECT_NEAR(p3.p_i, 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(p3.p_v, 200.0);
  EXPECT_NEAR(p3.p_v / p3.p_i, 0.5 * b.pv_max / b.pi_min, 1e-12);
  EXPECT_FALSE(absorption_power(1.5, b).has_value());
}

TEST(Power, GridOracle) {
  power_box b;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < 20; ++r) {
    double lam = std::pow(10.0, -3.5 * u(rng));
    auto p = *absorption_power(lam, b);
    ASSERT_TRUE(in_feasible_set(p.p_i, p.p_v, lam, b));
    double best = 1e300;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j) {
        double pi = 10 + 190.0 * i / 199, pv = 10 + 190.0 * j / 199;
        if (in_feasible_set(pi, pv, lam, b)) best = std::min(best, pv / pi);
      }
    double ratio = p.p_v / p.p_i;
    EXPECT_LE(ratio, best * (1 + 1e-12));
    EXPECT_GE(ratio, best / ((1 + 190.0 / 199 / 10) * (1 + 190.0 / 199 / 10)));
  }
}

TEST(Power, EdgeWeight) {
  power_box degenerate{10, 10, 10, 10};
  EXPECT_TRUE(std::isinf(edge_weight(1e-9, 1e-9, 0.6, 1.2, degenerate, 10.0)));
  power_box b;
  double w1 = edge_weight(1e-9, 1e-9, 0.6, 0.5, b, 10.0), w2 = edge_weight(2e-9, 1e-9, 0.6, 0.5, b, 10.0);
  EXPECT_LT(w1, w2);
  auto p = *absorption_power(0.5, b);
  EXPECT_DOUBLE_EQ(w1, capability_factor(0.6, p.p_v / p.p_i, 10.0));
}

TEST(Matching, SmallCases) {
  auto m = *hungarian_match({{0, 1}, {1, 0}});
  EXPECT_EQ(m.col_of_row, (std::vector<int>{0, 1}));
  EXPECT_EQ(m.cost, 0.0);
  auto eq = *hungarian_match(std::vector<std::vector<double>>(4, std::vector<double>(4, 2.5)));
  EXPECT_EQ(eq.col_of_row, (std::vector<int>{0, 1, 2, 3}));
  double inf = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(hungarian_match({{inf, inf}, {0, 1}}).has_value());
  auto fin = *hungarian_match({{inf, 1}, {0, inf}});
  EXPECT_EQ(fin.col_of_row, (std::vector<int>{1, 0}));
}

TEST(Matching, TieBreakPrefersLowRows) {
  // two optimal matchings of cost 2: {0->0,1->1} and {0->1,1->0}
  auto m = *hungarian_match({{1, 1, 5}, {1, 1, 5}, {5, 5, 0}});
  EXPECT_EQ(m.col_of_row, (std::vector<int>{0, 1, 2}));
}

TEST(Matching, BruteForceOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < 100; ++r) {
    std::vector<std::vector<double>> w(6, std::vector<double>(6));
    for (auto& row : w)
      for (auto& v : row) v = u(rng) < 0.1 ? std::numeric_limits<double>::infinity() : u(rng);
    std::vector<int> perm(6), best_perm;
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0;
      for (int i = 0; i < 6; ++i) s += w[i][perm[i]];
      if (s < best - 1e-12) {
        best = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto m = hungarian_match(w);
    if (!std::isfinite(best)) {
      EXPECT_FALSE(m.has_value());
      continue;
    }
    ASSERT_TRUE(m.has_value());
    EXPECT_NEAR(m->cost, best, 1e-9);
    EXPECT_EQ(m->col_of_row, best_perm);
  }
}

namespace {
large_scale_state random_large(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  large_scale_state s;
  s.m = s.n = m;
  for (int i = 0; i < m; ++i) {
    s.l_i.push_back(std::pow(10.0, -9 - 2 * u(rng)));
    s.l_v.push_back(std::pow(10.0, -9 - 2 * u(rng)));
    s.delta.push_back(0.65);
  }
  for (int i = 0; i < m * m; ++i) {
    s.l_inm.push_back(std::pow(10.0, -9 - 2 * u(rng)));
    s.l_vmn.push_back(std::pow(10.0, -10 - 2 * u(rng)));
  }
  return s;
}
}  // namespace

TEST(Plan, SinglePair) {
  std::mt19937_64 rng(8);
  auto large = random_large(1, rng);
  auto plan = plan_absorption(large, {0.5}, power_box{}, 10.0, 1000);
  EXPECT_EQ(plan.match, std::vector<int>{0});
  EXPECT_NEAR(plan.p_i_a[0], 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(plan.p_v_a[0], 200.0);
}

TEST(Plan, NoWorseThanIdentity) {
  std::mt19937_64 rng(9);
  auto large = random_large(10, rng);
  std::vector<double> w(10, 0.5);
  auto best = plan_absorption(large, w, power_box{}, 10.0, 1000);
  auto ident = plan_absorption(large, w, power_box{}, 10.0, 1000, true);
  for (double p : best.phi) EXPECT_TRUE(std::isfinite(p));
  EXPECT_LE(best.total_weight, ident.total_weight + 1e-9);
  std::vector<int> cols = best.match;
  std::sort(cols.begin(), cols.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(cols[i], i);
}

TEST(Plan, JointBruteForce) {
  std::mt19937_64 rng(10);
  power_box b;
  for (int r = 0; r < 5; ++r) {
    auto large = random_large(3, rng);
    std::vector<double> lam = {0.5, 0.05, 0.002};
    auto plan = plan_absorption(large, lam, b, 10.0, 1000);
    // per-edge grid optimum, then every permutation
    double g[3][3];
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) {
        g[m][n] = 1e300;
        for (int i = 0; i < 120; ++i)
          for (int j = 0; j < 120; ++j) {
            double pi = 10 + 190.0 * i / 119, pv = 10 + 190.0 * j / 119;
            if (in_feasible_set(pi, pv, lam[m], b))
              g[m][n] = std::min(g[m][n], capability_factor(0.65, pv * large.l_v[m] / (pi * large.inm(m, n)), 10));
          }
      }
    std::vector<int> perm = {0, 1, 2}, best_perm;
    double best = 1e300;
    do {
      double s = g[0][perm[0]] + g[1][perm[1]] + g[2][perm[2]];
      if (s < best) {
        best = s;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(plan.match, best_perm);
    EXPECT_LE(plan.total_weight, best + 1e-9);
    EXPECT_GE(plan.total_weight, best * 0.9);
  }
}

TEST(Run, AbsorptionBookkeeping) {
  sim_config c;
  c.num_pairs = 3;
  c.hr_weights.assign(3, 0.5);
  c.absorption_len = 50;
  auto tr = make_stream(1, 0, 0, purpose::topology);
  auto topo = build_topology(c, tr);
  auto sr = make_stream(1, 0, 0, purpose::shadowing);
  auto large = draw_large_scale(c, topo, sr);
  fading_streams st(1, 0, 3, 3);
  auto res = run_absorption(c, large, st, noise_power(c));
  EXPECT_EQ(res.log.size(), 150u);
  for (int m = 0; m < 3; ++m) {
    EXPECT_EQ(res.estimates[m].z.size(), 50u);
    int n = res.plan.match[m];
    EXPECT_NEAR(res.estimates[m].lambda_y,
                res.plan.p_i_a[m] * large.inm(m, n) / (res.plan.p_v_a[m] * large.l_v[m] * (1 - std::pow(large.delta[m], 2))),
                1e-12 * res.estimates[m].lambda_y);
  }
  for (const auto& r : res.log) {
    EXPECT_EQ(r.ph, phase::absorption);
    EXPECT_FALSE(r.infeasible);
  }
  EXPECT_EQ(res.last.slot, 49);
}
