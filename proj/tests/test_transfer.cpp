#include "cml/transfer_ops.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cml;

namespace {

PerturbationMapSpec single(Rational a, Rational b, Rational alpha) {
  PerturbationMapSpec s;
  s.intervals.push_back({a, b, alpha, PerturbationMapSpec::midpoint_intercept(a, b, alpha)});
  return s;
}

}  // namespace

TEST(Ulam, DoublingFourBins) {
  auto op = ulam(maps::doubling(), 4);
  EXPECT_TRUE(op.exact());
  EXPECT_TRUE(op.row_stochastic());
  std::vector<Rational> f{4, 0, 0, 0};
  auto out = op.push(ExactGridMeasure(f));
  EXPECT_EQ(out.densities(), (std::vector<Rational>{2, 2, 0, 0}));
}

TEST(Ulam, EntriesMatchPreimageOracle) {
  const std::vector<PiecewiseAffineMap> catalog{
      maps::doubling(), maps::tripling(), maps::tent(), maps::multiply(5),
      build_perturbation_map(single(Rational(1, 4), Rational(1, 2), Rational(1, 2))),
      maps::affine(Rational(1, 3), Rational(1, 5))};
  for (const auto& m : catalog) {
    for (std::size_t bins : {3u, 8u, 13u}) {
      auto op = ulam(m, bins);
      EXPECT_TRUE(op.row_stochastic());
      for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j)
          EXPECT_EQ(op.exact_entry(i, j), oracle::ulam_entry(m, bins, i, j)) << m.name() << " " << i << "," << j;
    }
  }
}

TEST(Ulam, PreservesMassAndPositivity) {
  auto op = ulam(maps::tent(), 37);
  for (const auto& mu : random_signed_measures(37, 50, 2)) {
    EXPECT_EQ(op.push(mu).mass(), mu.mass());
  }
  auto leb = op.push(ExactGridMeasure::lebesgue(37));
  EXPECT_TRUE(leb.nonnegative());
}

TEST(ExactPush, MatchesPreimageDensity) {
  const std::vector<PiecewiseAffineMap> catalog{
      maps::doubling(), maps::tent(), build_perturbation_map(single(Rational(1, 4), Rational(1, 2), Rational(1, 2))),
      maps::affine(Rational(1, 3), Rational(1, 5)),
      compose(maps::multiply(8), build_perturbation_map(single(Rational(9, 20), Rational(11, 20), Rational(3, 4))))};
  for (const auto& m : catalog) {
    for (const auto& mu : random_signed_measures(10, 6, 8)) {
      auto out = exact_push(m, mu);
      EXPECT_EQ(out.mass(), mu.mass());
      const long n = static_cast<long>(out.bins());
      for (long k = 0; k < n; ++k) {
        Rational mid = (Rational(k) + Rational(1, 2)) / n;
        EXPECT_EQ(out[static_cast<std::size_t>(k)], oracle::pushforward_density(m, mu.densities(), mid)) << m.name();
      }
    }
  }
}

TEST(LasotaYorke, TriplingConstants) {
  auto c = lasota_yorke_constants(maps::tripling());
  EXPECT_EQ(c.theta, Rational(2, 3));
  EXPECT_EQ(c.Theta, 2);
}

TEST(LasotaYorke, TriplingHoldsSmall) {
  auto r = verify_lasota_yorke(maps::tripling(), 27, 100, 1);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_TRUE(r.lebesgue_holds);
  EXPECT_LE(r.max_ratio, 1.0);
}

TEST(LasotaYorke, RequiresExpansion) {
  EXPECT_THROW(verify_lasota_yorke(maps::affine(Rational(1, 2), 0), 8, 1, 1), std::invalid_argument);
}

TEST(Perturbation, Sharpness) {
  auto r = verify_perturbation_bounds(single(Rational(1, 4), Rational(1, 2), Rational(1, 2)), 16, 100, 5);
  EXPECT_EQ(r.constants.perturb_factor, 4);
  EXPECT_EQ(r.constants.weak_factor, Rational(5, 8));
  EXPECT_EQ(r.lebesgue_strong, 8);
  EXPECT_EQ(r.sharp_value, 8);
  EXPECT_EQ(r.lebesgue_weak_distance, Rational(1, 4));
  EXPECT_TRUE(r.interior);
  EXPECT_TRUE(r.passed());
}

TEST(Perturbation, TwoIntervalsStayBounded) {
  PerturbationMapSpec s = single(Rational(1, 8), Rational(1, 4), Rational(1, 2));
  s.intervals.push_back({Rational(1, 2), Rational(3, 4), Rational(1, 2),
                         PerturbationMapSpec::midpoint_intercept(Rational(1, 2), Rational(3, 4), Rational(1, 2))});
  auto r = verify_perturbation_bounds(s, 32, 100, 6);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.sharp_value, 2 * (2 + 1 + 4));
  EXPECT_EQ(r.lebesgue_strong, r.sharp_value);
}

TEST(Invariant, DoublingKeepsLebesgue) {
  auto r = invariant_measure(ulam(maps::doubling(), 64));
  for (double f : r.measure.densities()) EXPECT_NEAR(f, 1.0, 1e-12);
}

TEST(Invariant, FixedPointOfPush) {
  auto op = ulam(compose(maps::tripling(), maps::tent()), 30);
  auto r = invariant_measure(op, 1e-12);
  auto again = op.push(r.measure);
  EXPECT_LT(norms(again - r.measure).weak, 1e-10);
  EXPECT_NEAR(r.measure.mass(), 1.0, 1e-12);
}

TEST(Convergence, HypothesisChecked) {
  EXPECT_THROW(perturbed_convergence_study(maps::tripling(), Rational(1, 2), Rational(1, 2),
                                           {Rational(1, 10)}, 120),
               std::invalid_argument);
}

TEST(Convergence, SmallStudy) {
  auto s = perturbed_convergence_study(maps::multiply(8), Rational(3, 4), Rational(1, 2),
                                       {Rational(1, 10), Rational(1, 20), Rational(1, 40)}, 960);
  EXPECT_EQ(s.hypothesis_lhs, Rational(2) * (2 + Rational(4, 3)));
  EXPECT_TRUE(s.strictly_decreasing);
  EXPECT_TRUE(s.bounded);
}

TEST(Contraction, GainsMatchClosedForms) {
  for (std::size_t n = 2; n <= 6; ++n) {
    for (Rational g : {Rational(1, 10), Rational(1, 2), Rational(9, 10)}) {
      auto r = verify_interaction_contraction(n, g, 500, 3);
      const double gd = g.get_d();
      EXPECT_NEAR(r.euclidean_min_gain, gd, 1e-10);
      // ||G^{-1}||_inf = (1 + (n-2)(1-gamma)/n) / gamma
      const double max_gain = gd / (1.0 + (static_cast<double>(n) - 2.0) * (1.0 - gd) / static_cast<double>(n));
      EXPECT_NEAR(r.max_norm_min_gain, max_gain, 1e-12);
      EXPECT_NEAR(r.sum_norm_min_gain, max_gain, 1e-12);  // G is symmetric
      EXPECT_GE(r.sampled_max_norm_gain, r.max_norm_min_gain - 1e-12);
      EXPECT_TRUE(r.affine_bound_holds);
      ASSERT_EQ(r.eigenvalues.size(), n);
      EXPECT_NEAR(r.eigenvalues.back(), 1.0, 1e-10);
    }
  }
  EXPECT_NEAR(verify_interaction_contraction(3, Rational(1, 2)).max_norm_min_gain, 3.0 / 7.0, 1e-12);
}

TEST(Contraction, ClusterGrowthWithinBound) {
  auto r = measure_cluster_growth(Rational(1, 2), Rational(1, 10), Rational(1), 8, 8, 5, 2);
  EXPECT_DOUBLE_EQ(r.bound, 8.0);
  EXPECT_TRUE(r.within_bound);
}
