#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rv2x/adaptation.hpp"
#include "rv2x/qos.hpp"
#include "rv2x/scenario.hpp"

using namespace rv2x;

namespace {
const qos_constants k = make_qos_constants(3200.0, 2e6, 0.015);

// Composite Simpson rule, used as an independent quadrature oracle.
template <class F>
double simpson(F f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace

TEST(Sinr, CapAndSymmetry) {
  auto capped = sinr_v2v(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
  EXPECT_TRUE(capped.capped);
  EXPECT_TRUE(std::isfinite(capped.value));
  auto one = sinr_v2v(2.0, 3.0, 1.0, 3.0, 2.0, 1.0, 1e-300);
  EXPECT_NEAR(one.value, 1.0, 1e-12);
  EXPECT_FALSE(one.capped);
}

TEST(Sinr, MatchesHandEvaluation) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 100; ++i) {
    double pv = 100 * u(rng), lv = 1e-9 * u(rng), gv = u(rng), pi = 100 * u(rng), li = 1e-10 * u(rng),
           gi = u(rng), s2 = 1e-11 * u(rng);
    double hand = pv * lv * gv / (pi * li * gi + s2);
    EXPECT_NEAR(sinr_v2v(pv, lv, gv, pi, li, gi, s2).value / hand, 1.0, 1e-12);
    EXPECT_NEAR(sinr_v2i(pi, li, gi, pv, lv, gv, s2).value / (pi * li * gi / (pv * lv * gv + s2)), 1.0, 1e-12);
  }
}

TEST(Rate, ThroughputAndDelay) {
  EXPECT_NEAR(throughput(1.0, 2e6), 2e6, 1e-6);
  EXPECT_NEAR(delay(k.gamma_v, 2e6, 3200.0), 0.015, 1e-15);
  EXPECT_NEAR(delay(3.0, 2e6, 3200.0), 0.0008, 1e-15);
  EXPECT_TRUE(std::isinf(delay(0.0, 2e6, 3200.0)));
}

TEST(Outage, ClosedFormValues) {
  EXPECT_NEAR(delay_outage_closed_form(1.0, 1.0, 1.0, 1.0, 0.0, k.gamma_v), 0.9287314100385485, 1e-12);
  EXPECT_DOUBLE_EQ(delay_outage_closed_form(3.0, 1.0, 7.0, 1.0, 0.5, 0.0), 1.0);
}

TEST(Outage, MatchesMonteCarlo) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> ex(1.0);
  double pv = 50, lv = 2e-10, pi = 120, li = 1e-10, s2 = 8e-12, thr = 0.3;
  double p = delay_outage_closed_form(pv, lv, pi, li, s2, thr);
  const int n = 1000000;
  long hits = 0;
  for (int i = 0; i < n; ++i) hits += pv * lv * ex(rng) >= thr * (pi * li * ex(rng) + s2);
  EXPECT_LT(std::abs(static_cast<double>(hits) / n - p), 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Hazard, NoiseFreeApproximation) {
  EXPECT_NEAR(hazard_rate_noise_free(1.0, k), 901.273758915527, 1e-9);
  EXPECT_GT(hazard_rate_noise_free(2.0, k), hazard_rate_noise_free(1.0, k));
}

TEST(Hazard, MatchesFiniteDifference) {
  auto sat = [&](double tau, double pv, double lv, double pi, double li, double s2) {
    return delay_outage_closed_form(pv, lv, pi, li, s2, std::exp2(3200.0 / (2e6 * tau)) - 1.0);
  };
  for (double s2 : {0.0, 1e-12, 8e-12}) {
    double pv = 100, lv = 1e-10, pi = 100, li = 1e-10, h = 1e-7;
    double fd = (sat(0.015 + h, pv, lv, pi, li, s2) - sat(0.015 - h, pv, lv, pi, li, s2)) / (2 * h) /
                (1.0 - sat(0.015, pv, lv, pi, li, s2));
    EXPECT_NEAR(hazard_rate(pv, lv, pi, li, s2, k) / fd, 1.0, 1e-6);
  }
  // noise-free, equal received powers
  double fd0 = 64.23;
  EXPECT_NEAR(hazard_rate(1, 1, 1, 1, 0, k), fd0, 5e-3);
}

TEST(Satisfaction, GaussianClosedFormMatchesQuadrature) {
  struct row {
    double c, ell, m, v, ref;
  };
  for (auto r : {row{1.0, 0.1, 0.3, 0.04, 0.68204018249852}, row{5.0, -0.2, 0.5, 0.01, 0.25261944456532465},
                 row{0.2, 1.0, 0.0, 1.0, 0.816968961779356}, row{30.0, 0.05, 0.2, 0.02, 0.068416648583202}}) {
    EXPECT_NEAR(exp_vs_gauss_prob(r.c, r.ell, r.m, r.v), r.ref, 1e-10);
    double s = std::sqrt(r.v);
    double q = simpson(
        [&](double e) {
          return std::min(1.0, std::exp(-r.c * (e + r.ell))) * std::exp(-0.5 * (e - r.m) * (e - r.m) / r.v) /
                 (s * std::sqrt(2 * std::numbers::pi));
        },
        r.m - 12 * s, r.m + 12 * s, 200000);
    EXPECT_NEAR(exp_vs_gauss_prob(r.c, r.ell, r.m, r.v), q, 1e-6);
  }
}

TEST(Satisfaction, DeterministicLimit) {
  pair_snapshot s{1e-9, 1e-10, 1.0, 0.8, 0.5};
  auto zero = error_distribution::gaussian(0.0, 1e-24);
  double g = k.gamma_v;
  for (double pv : {10.0, 50.0, 200.0}) {
    double pi = 100.0;
    bool ok = pv * s.l_v * s.hat_gv >= g * pi * s.l_inm * s.hat_ginm;
    EXPECT_EQ(true_satisfaction_prob(pv, pi, s, 0.0, g, zero), ok ? 1.0 : 0.0);
  }
}

TEST(Satisfaction, DominanceLimit) {
  pair_snapshot s{1e-9, 1e-10, 0.65, 1.0, 1.0};
  EXPECT_GT(true_satisfaction_prob(200.0, 1e-3, s, 8e-12, k.gamma_v, error_distribution::type1()), 0.999);
}

TEST(Satisfaction, MonteCarloAgrees) {
  pair_snapshot s{2e-9, 1e-9, 0.65, 0.7, 1.2};
  std::mt19937_64 rng(4);
  auto law = error_distribution::type1();
  for (double pv : {20.0, 200.0}) {
    double p = true_satisfaction_prob(pv, 50.0, s, 8e-12, k.gamma_v, law);
    double mc = true_satisfaction_prob_mc(pv, 50.0, s, 8e-12, k.gamma_v, law, 400000, rng);
    EXPECT_LT(std::abs(p - mc), 3.0 * std::sqrt(p * (1 - p) / 400000) + 1e-9);
  }
}

TEST(Deviation, NonNegativeAndZeroOnTruth) {
  std::vector<double> a = {0.9, 0.95, 0.99}, b = {0.8, 0.97, 0.99};
  EXPECT_EQ(deviation_j(a, a), 0.0);
  EXPECT_GT(deviation_j(a, b), 0.0);
  EXPECT_NEAR(deviation_j(a, b), 0.01 + 0.0004, 1e-15);
  EXPECT_THROW(deviation_j(a, {0.1}), std::invalid_argument);
}
