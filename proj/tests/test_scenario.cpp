#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rv2x/channel.hpp"
#include "rv2x/pathloss.hpp"
#include "rv2x/scenario.hpp"
#include "rv2x/special.hpp"

using namespace rv2x;

TEST(Special, ErfcxMatchesReference) {
  EXPECT_NEAR(erfcx(0.0), 1.0, 1e-15);
  EXPECT_NEAR(erfcx(1.0), 0.427583576155807, 1e-14);
  EXPECT_NEAR(erfcx(4.9), 0.11287909055975874, 1e-13);
  EXPECT_NEAR(erfcx(5.1), 0.10861102631393281, 1e-13);
  EXPECT_NEAR(erfcx(20.0), 0.028174348741051323, 1e-14);
  EXPECT_NEAR(erfcx(-1.0), 5.008980080762283, 1e-12);
}

TEST(Special, DecibelRoundTrip) {
  for (double db : {-120.0, -3.0, 0.0, 23.0}) EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, 1e-12);
}

TEST(Scenario, NoisePower) {
  sim_config c;
  EXPECT_NEAR(noise_power(c), 7.962143411069939e-12, 1e-20);
  EXPECT_NEAR(linear_to_db(noise_power(c)), -110.99, 5e-3);
  c.bandwidth = 1.0;
  EXPECT_NEAR(linear_to_db(noise_power(c)), -174.0, 1e-12);
  c.bandwidth = 10e6;
  EXPECT_NEAR(linear_to_db(noise_power(c)), -104.0, 1e-9);
}

TEST(Scenario, QosConstants) {
  auto k = make_qos_constants(3200.0, 2e6, 0.015);
  EXPECT_NEAR(k.gamma_v, 0.07673756824752309, 1e-15);
  EXPECT_NEAR(k.d_v, 5.307289668506612, 1e-12);
  auto z = make_qos_constants(0.0, 2e6, 0.015);
  EXPECT_EQ(z.gamma_v, 0.0);
  EXPECT_EQ(z.d_v, 0.0);
}

namespace {
bool on_street(const sim_config& c, point p) {
  auto near_line = [&](double v) {
    double r = std::fmod(v, c.street_spacing);
    return std::min(r, c.street_spacing - r) < 1e-9;
  };
  bool inside = p.x >= -1e-9 && p.x <= c.area_side + 1e-9 && p.y >= -1e-9 && p.y <= c.area_side + 1e-9;
  return inside && (near_line(p.x) || near_line(p.y));
}
}  // namespace

TEST(Scenario, TopologyShape) {
  sim_config c;
  auto rng = make_stream(7, 0, 0, purpose::topology);
  auto t = build_topology(c, rng);
  EXPECT_EQ(t.v2v_tx.size(), 10u);
  EXPECT_EQ(t.v2v_rx.size(), 10u);
  EXPECT_EQ(t.v2i_tx.size(), 10u);
  EXPECT_DOUBLE_EQ(t.rsu.x, 200.0);
  EXPECT_DOUBLE_EQ(t.rsu.y, 200.0);
}

TEST(Scenario, TopologyDeterministic) {
  sim_config c;
  auto a = make_stream(11, 3, 0, purpose::topology), b = make_stream(11, 3, 0, purpose::topology);
  auto ta = build_topology(c, a), tb = build_topology(c, b);
  for (int m = 0; m < c.num_pairs; ++m) {
    EXPECT_EQ(ta.v2v_tx[m].x, tb.v2v_tx[m].x);
    EXPECT_EQ(ta.v2v_rx[m].y, tb.v2v_rx[m].y);
    EXPECT_EQ(ta.v2i_tx[m].x, tb.v2i_tx[m].x);
  }
}

TEST(Scenario, PointsOnStreetsAndDistanceLaw) {
  for (auto placement : {v2i_placement::uniform, v2i_placement::clustered}) {
    sim_config c;
    c.placement = placement;
    double lo = 1e9, hi = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      auto rng = make_stream(5, trial, 0, purpose::topology);
      auto t = build_topology(c, rng);
      for (int m = 0; m < c.num_pairs; ++m) {
        ASSERT_TRUE(on_street(c, t.v2v_tx[m]));
        ASSERT_TRUE(on_street(c, t.v2v_rx[m]));
        ASSERT_TRUE(on_street(c, t.v2i_tx[m]));
        lo = std::min(lo, t.v2v_distance(m));
        hi = std::max(hi, t.v2v_distance(m));
        if (placement == v2i_placement::clustered)
          ASSERT_LE(distance(t.v2i_tx[m], t.v2v_rx[m]), c.cluster_radius + 1e-9);
      }
    }
    EXPECT_GE(lo, 60.0);
    EXPECT_LE(hi, 80.0);
    EXPECT_LT(lo, 61.0);
    EXPECT_GT(hi, 79.0);
  }
}

TEST(Pathloss, V2iModel) {
  EXPECT_NEAR(pathloss_v2i_db(0.1), 90.5, 1e-9);
  EXPECT_NEAR(pathloss_v2i_db(1.0), 128.1, 1e-12);
  EXPECT_NEAR(pathloss_v2i_db(0.5), 116.78, 5e-3);
  EXPECT_THROW(pathloss_v2i_db(0.0), std::invalid_argument);
}

TEST(Pathloss, B1LosTable) {
  const double fc = 5.9e9;
  EXPECT_NEAR(b1_los_db(10, fc), 65.13764014612251, 1e-9);
  EXPECT_NEAR(b1_los_db(60, fc), 91.18576928504605, 1e-9);
  EXPECT_NEAR(b1_los_db(70, fc), 93.86364087027059, 1e-9);
  EXPECT_NEAR(b1_los_db(80, fc), 96.18331874937805, 1e-9);
  EXPECT_NEAR(b1_los_db(200, fc), 112.10091909625956, 1e-9);
  EXPECT_GT(b1_los_db(80, fc), b1_los_db(60, fc));
}

TEST(Pathloss, B1NlosTable) {
  const double fc = 5.9e9;
  EXPECT_NEAR(b1_nlos_db(50, 30, fc), 111.60811719869177, 1e-9);
  EXPECT_NEAR(b1_nlos_db(120, 80, fc), 138.0240116682185, 1e-9);
  EXPECT_NEAR(b1_nlos_db(5, 200, fc), 114.529878847673, 1e-9);
  EXPECT_NEAR(b1_nlos_db(100, 50, fc, 1.5, 25.0), 119.54691827904296, 1e-9);
  EXPECT_GT(pathloss_winner_b1_db(70, false, fc), pathloss_winner_b1_db(70, true, fc));
}

TEST(Channel, DopplerCoefficient) {
  EXPECT_DOUBLE_EQ(doppler_coefficient(10.0, 5.9e9, 0.0), 1.0);
  EXPECT_NEAR(doppler_coefficient(10.0, 5.9e9, 1e-3), 0.6527530721238584, 1e-12);
  double dt = 2.4048255576957724 / (2.0 * std::numbers::pi * 10.0 * 5.9e9 / speed_of_light);
  EXPECT_NEAR(doppler_coefficient(10.0, 5.9e9, dt), 0.0, 1e-12);
}

namespace {
large_scale_state flat_large(int m, int n, double delta) {
  large_scale_state s;
  s.m = m;
  s.n = n;
  s.l_i.assign(n, 1.0);
  s.l_v.assign(m, 1.0);
  s.l_inm.assign(m * n, 1.0);
  s.l_vmn.assign(m * n, 1.0);
  s.delta.assign(m, delta);
  return s;
}
}  // namespace

TEST(Channel, PerfectCorrelationKeepsReportedGain) {
  auto large = flat_large(2, 2, 1.0);
  fading_streams st(1, 0, 2, 2);
  auto ch = initial_channel_state(2, 2);
  for (int t = 0; t < 50; ++t) {
    ch = evolve_small_scale(ch, large, error_distribution::type1(), st);
    for (int m = 0; m < 2; ++m) EXPECT_DOUBLE_EQ(ch.gv[m], ch.hat_gv[m]);
  }
  EXPECT_EQ(ch.slot, 49);
}

TEST(Channel, ZeroErrorLawKeepsInterferenceGain) {
  auto large = flat_large(3, 3, 0.5);
  fading_streams st(2, 0, 3, 3);
  auto ch = initial_channel_state(3, 3);
  auto zero = error_distribution::gaussian(0.0, 1e-300);
  for (int t = 0; t < 50; ++t) {
    ch = evolve_small_scale(ch, large, zero, st);
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) EXPECT_NEAR(ch.ginm_at(m, n), ch.hat_ginm_at(m, n), 1e-140);
  }
}

TEST(Channel, UncorrelatedGainHasUnitMean) {
  auto large = flat_large(1, 1, 0.0);
  fading_streams st(3, 0, 1, 1);
  auto ch = initial_channel_state(1, 1);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < n; ++t) {
    ch = evolve_small_scale(ch, large, error_distribution::type1(), st);
    s += ch.gv[0];
    s2 += ch.gv[0] * ch.gv[0];
  }
  double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * se);
}

TEST(Channel, LargeScaleIsFiniteAndSeeded) {
  sim_config c;
  auto tr = make_stream(9, 0, 0, purpose::topology);
  auto topo = build_topology(c, tr);
  auto a = make_stream(9, 0, 0, purpose::shadowing), b = make_stream(9, 0, 0, purpose::shadowing);
  auto la = draw_large_scale(c, topo, a), lb = draw_large_scale(c, topo, b);
  for (int m = 0; m < c.num_pairs; ++m) {
    EXPECT_GT(la.l_v[m], 0.0);
    EXPECT_LT(la.l_v[m], 1.0);
    EXPECT_EQ(la.l_v[m], lb.l_v[m]);
    for (int n = 0; n < c.num_pairs; ++n) {
      EXPECT_GT(la.inm(m, n), 0.0);
      EXPECT_EQ(la.vmn(m, n), la.vmn(m, 0));
    }
  }
}
