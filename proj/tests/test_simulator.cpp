#include "cml/simulator.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cml;

namespace {

SimulationSpec rigid_pair() {
  SimulationSpec s;
  s.space = {Topology::interval, 1};
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.particles = 2;
  return s;
}

// a^e mod m without overflow (m < 2^32)
std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = r * a % m;
    a = a * a % m;
    e >>= 1;
  }
  return r;
}

}  // namespace

TEST(Step, RigidPairOnInterval) {
  auto spec = rigid_pair();
  auto next = step(Configuration::line({0.10, 0.105}), spec);
  EXPECT_NEAR(next[0][0], 0.205, 1e-15);
  EXPECT_EQ(next[0][0], next[1][0]);
  auto exact = step(ExactConfiguration::line({Rational(1, 10), Rational(21, 200)}), spec);
  EXPECT_EQ(exact[0][0], Rational(41, 200));
}

TEST(Step, FarPairOnlyFeelsLocalMap) {
  auto spec = rigid_pair();
  auto next = step(ExactConfiguration::line({Rational(1, 10), Rational(3, 10)}), spec);
  EXPECT_EQ(next[0][0], Rational(1, 5));
  EXPECT_EQ(next[1][0], Rational(3, 5));
}

TEST(Quantize, RoundsToGrid) {
  EXPECT_DOUBLE_EQ(quantize(0.3, 2, Topology::circle), 0.25);
  EXPECT_DOUBLE_EQ(quantize(0.375, 2, Topology::circle), 0.5);  // tie goes up
  EXPECT_DOUBLE_EQ(quantize(0.9, 2, Topology::circle), 0.0);
  EXPECT_DOUBLE_EQ(quantize(0.9, 2, Topology::interval), 0.75);
}

TEST(Run, RationalGridPeriodClaim) {
  // 2 is a square mod q, so 2^((q-1)/2) = 1.
  EXPECT_EQ(pow_mod(2, (kRationalGrid - 1) / 2, kRationalGrid), 1u);
  EXPECT_EQ(kRationalGrid % 8, 7);
}

TEST(Run, SeededRunsAreDeterministic) {
  SimulationSpec s;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.arithmetic = Arithmetic::rational();
  s.seed = 42;
  s.horizon = 2000;
  auto a = run(s);
  auto b = run(s);
  EXPECT_EQ(a.diameters, b.diameters);
  EXPECT_EQ(a.hit_time, b.hit_time);
  ASSERT_TRUE(a.sync_time.has_value());
  EXPECT_EQ(a.diameters.back(), 0.0);
}

TEST(Run, RigidSyncFollowsHit) {
  // Once two particles are within eps the rigid move merges them, so sync
  // comes exactly one step after the hit.
  SimulationSpec s;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.arithmetic = Arithmetic::rational();
  s.horizon = 5000;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    s.seed = seed;
    auto r = run(s);
    ASSERT_TRUE(r.hit_time && r.sync_time);
    EXPECT_EQ(*r.sync_time, *r.hit_time == 0 && r.diameters[0] == 0.0 ? 0 : *r.hit_time + 1);
  }
}

TEST(Run, FloatDoublingCollapsesWithoutInteraction) {
  // Doubles lose one mantissa bit per doubling step; after ~60 steps every
  // orbit lands on 0. This is why the sync experiments run in rationals.
  SimulationSpec s;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 1;
  s.horizon = 80;
  s.seed = 3;
  auto r = run(s);
  EXPECT_EQ(r.final_config[0][0], 0.0);
  EXPECT_EQ(r.final_config[1][0], 0.0);
}

TEST(Run, SoftDecayBound) {
  SimulationSpec s;
  s.particles = 4;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = Rational(2, 5);
  s.arithmetic = Arithmetic::rational();
  s.start_near_diagonal = true;
  s.horizon = 30;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    s.seed = seed;
    auto r = run(s);
    EXPECT_LE(r.diameters[0], 0.01);
    EXPECT_TRUE(decay_violations(r, Rational(4, 5), 30).empty());
  }
}

TEST(Run, NearDiagonalStartIsNearDiagonal) {
  const Space circle{Topology::circle, 2};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto c = random_exact_near_diagonal(circle, 5, Rational(1, 100), seed);
    EXPECT_LE(diameter(c, circle), Rational(1, 100));
  }
}

TEST(Ensemble, IndependentOfThreadCount) {
  SimulationSpec s;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.arithmetic = Arithmetic::rational();
  s.horizon = 3000;
  s.record_series = false;
  auto a = ensemble(s, 40, 99, 1);
  auto b = ensemble(s, 40, 99, 4);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].hit_time, b.runs[i].hit_time);
    EXPECT_EQ(a.runs[i].final_config, b.runs[i].final_config);
  }
  EXPECT_EQ(a.summary.hit_time_mean, b.summary.hit_time_mean);
}

TEST(Ensemble, HitTimesAgreeWithPairSampler) {
  SimulationSpec s;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.arithmetic = Arithmetic::rational();
  s.record_series = false;
  auto e = ensemble(s, 400, 77, 0);
  auto o = oracle::doubling_pair_hits(20000, 77);
  const double se = std::hypot(o.sd / std::sqrt(400.0), o.sd / std::sqrt(20000.0));
  EXPECT_NEAR(e.summary.hit_time_mean, o.mean, 5.0 * se);
}

TEST(GapDynamics, FirstSteps) {
  auto tr = lemma5_distance_dynamics(Rational(9, 1000), Rational(2, 1000), Rational(1, 100), 2);
  EXPECT_EQ(tr.final_a, Rational(53, 9000));
  EXPECT_EQ(tr.final_b, Rational(23, 4500));
  EXPECT_TRUE(tr.stays_in_A);
  EXPECT_TRUE(tr.sum_conserved);
}

TEST(GapDynamics, ConvergesToEqualGaps) {
  auto tr = lemma5_distance_dynamics(Rational(9, 1000), Rational(2, 1000), Rational(1, 100), 60);
  EXPECT_NEAR(tr.ab[50].first, 0.0055, 1e-12);
  EXPECT_NEAR(tr.ab[50].second, 0.0055, 1e-12);
  // a - b flips sign and shrinks by 3 each step
  for (std::size_t t = 1; t < 20; ++t) {
    double prev = tr.ab[t - 1].first - tr.ab[t - 1].second;
    double cur = tr.ab[t].first - tr.ab[t].second;
    EXPECT_NEAR(cur, -prev / 3.0, 1e-15);
  }
}

TEST(GapDynamics, RejectsStartOutsideA) {
  EXPECT_THROW(lemma5_distance_dynamics(Rational(1, 1000), Rational(2, 1000), Rational(1, 100), 3),
               std::invalid_argument);
}

TEST(GapDynamics, ExactPositionModeNeverSyncs) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto r = lemma5_position_mode(Rational(9, 1000), Rational(2, 1000), Rational(1, 100), 500,
                                  Arithmetic::rational(), seed);
    EXPECT_FALSE(r.sync_time.has_value());
    for (std::size_t t = 0; t < r.diameters.size(); ++t) EXPECT_GT(r.diameters[t], 0.01 * 0.99) << t;
  }
}

TEST(Shrink, ClosedFormAndExact) {
  auto four = circle_shrink_factor(4);
  ASSERT_TRUE(four.exact.has_value());
  EXPECT_EQ(*four.exact, Rational(1, 3));
  auto five = circle_shrink_factor(5);
  EXPECT_NEAR(five.closed_form, 0.5393446629166316, 1e-15);
  EXPECT_NEAR(five.simulated, five.closed_form, 1e-12);
  EXPECT_NEAR(circle_shrink_factor(3).closed_form, 0.0, 1e-15);
}
