#include "cml/bv_measures.hpp"
#include "cml/transfer_ops.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cml;

namespace {

ExactGridMeasure exact(std::vector<long> f, Boundary b = Boundary::zero_extension) {
  std::vector<Rational> q;
  for (long v : f) q.emplace_back(v);
  return ExactGridMeasure(std::move(q), b);
}

}  // namespace

TEST(Norms, Lebesgue) {
  auto r = norms(ExactGridMeasure::lebesgue(10));
  EXPECT_EQ(r.strong, 2);
  EXPECT_EQ(r.inner, 0);
  EXPECT_EQ(r.weak, 1);
  auto p = norms(ExactGridMeasure::lebesgue(10, Boundary::periodic));
  EXPECT_EQ(p.strong, 0);
}

TEST(Norms, Spike) {
  auto r = norms(exact({4, 0, 0, 0}));
  EXPECT_EQ(r.strong, 8);
  EXPECT_EQ(r.inner, 4);
  EXPECT_EQ(r.weak, 1);
}

TEST(Norms, SignedCyclic) {
  auto r = norms(exact({1, -1, 2}, Boundary::periodic));
  EXPECT_EQ(r.strong, 2 + 3 + 1);
  EXPECT_EQ(r.weak, Rational(4, 3));
}

TEST(Norms, RefineKeepsNorms) {
  auto mu = exact({3, -2, 0, 5, 1});
  auto fine = refine(mu, 7);
  EXPECT_EQ(norms(fine).strong, norms(mu).strong);
  EXPECT_EQ(norms(fine).weak, norms(mu).weak);
}

TEST(Norms, RestrictionInequalitiesOnRandomMeasures) {
  for (const auto& mu : random_signed_measures(24, 300, 4)) {
    for (auto [lo, hi] : {std::pair{0, 24}, {3, 10}, {0, 1}, {12, 12}, {5, 23}}) {
      auto c = check_variation_lemma(mu, Rational(lo, 24), Rational(hi, 24));
      EXPECT_TRUE(c.all()) << lo << " " << hi;
    }
  }
}

TEST(Norms, RestrictNeedsGridEndpoints) {
  EXPECT_THROW(restrict(exact({1, 1, 1}), Rational(1, 4), Rational(2, 3)), std::invalid_argument);
}

TEST(DiagonalBounds, UniformPair) {
  auto mu = ExactGridMeasure::lebesgue(100);
  auto r = diagonal_mass_bounds(mu, 2, Rational(1, 10), 200000, 9);
  EXPECT_EQ(r.lower_sum, Rational(1, 10));
  EXPECT_EQ(r.uniform_floor, Rational(1, 10));
  EXPECT_NEAR(r.mc_estimate, 0.19, 0.01);
  EXPECT_TRUE(r.mc_consistent());
}

TEST(DiagonalBounds, FloorHoldsForSkewedMeasures) {
  // Power mean inequality: sum p_b^N >= n_b^(1-N) for any probability vector.
  std::vector<long> f(40);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<long>((i * 7) % 5);
  std::vector<Rational> q;
  long total = 0;
  for (long v : f) total += v;
  for (long v : f) q.emplace_back(Rational(v * 40, total));
  ExactGridMeasure mu(q);
  for (unsigned n : {1u, 2u, 3u, 5u}) {
    auto r = diagonal_mass_bounds(mu, n, Rational(1, 8), 0, 1);
    EXPECT_TRUE(r.floor_holds()) << n;
  }
}

TEST(DiagonalBounds, RejectsBadInput) {
  EXPECT_THROW(diagonal_mass_bounds(exact({2, 0, 0}), 2, Rational(1, 4), 0, 1), std::invalid_argument);
  EXPECT_THROW(diagonal_mass_bounds(exact({1, 1}), 2, Rational(1, 3), 0, 1), std::invalid_argument);
  EXPECT_THROW(diagonal_mass_bounds(exact({3, -1}), 2, Rational(1, 2), 0, 1), std::invalid_argument);
}
