#include "cml/meanfield.hpp"

#include <gtest/gtest.h>

using namespace cml;

TEST(MeanField, AtomsMergeAndSort) {
  AtomicMeasure mu({{Rational(2, 3), Rational(1, 4)}, {Rational(1, 3), Rational(1, 2)}, {Rational(2, 3), Rational(1, 4)}});
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.atoms()[0].position, Rational(1, 3));
  EXPECT_EQ(mu.atoms()[1].mass, Rational(1, 2));
  EXPECT_EQ(mu.total_mass(), 1);
}

TEST(MeanField, PeriodTwoOrbitInvariant) {
  MeanFieldParams p;
  p.epsilon = Rational(1, 10);
  auto mu = AtomicMeasure::uniform_on({Rational(1, 3), Rational(2, 3)});
  EXPECT_EQ(mean_field_step(mu, p), mu);
}

TEST(MeanField, CloseAtomsAttract) {
  MeanFieldParams p;
  p.epsilon = Rational(1, 10);
  p.gamma = Rational(1, 2);
  auto mu = AtomicMeasure::uniform_on({Rational(2, 5), Rational(9, 20)});
  auto out = mean_field_step(mu, p);
  ASSERT_EQ(out.size(), 2u);
  // doubled to 4/5 and 9/10, both pulled halfway to 17/20
  EXPECT_EQ(out.atoms()[0].position, Rational(33, 40));
  EXPECT_EQ(out.atoms()[1].position, Rational(7, 8));
  EXPECT_EQ(total_variation(out, mu), 2);
}

TEST(MeanField, PointUpdateNeedsMassNearby) {
  MeanFieldParams p;
  auto mu = AtomicMeasure::uniform_on({Rational(1, 2)});
  EXPECT_THROW(mean_field_point_update(Rational(0), mu, p), std::domain_error);
  EXPECT_EQ(mean_field_point_update(Rational(9, 20), mu, p), Rational(19, 40));
}

TEST(MeanField, GridPointUpdateOnLebesgueIsIdentity) {
  MeanFieldParams p;
  auto leb = GridMeasure::lebesgue(64, Boundary::periodic);
  for (double x : {0.0, 0.3, 0.71, 0.999}) EXPECT_NEAR(mean_field_point_update(x, leb, p), x, 1e-12);
}

TEST(MeanField, LebesgueResidualWithinBound) {
  MeanFieldParams p;
  auto leb = GridMeasure::lebesgue(128, Boundary::periodic);
  for (std::size_t res : {4u, 16u, 64u}) {
    auto out = mean_field_step(leb, p, res);
    EXPECT_LE(norms(out - leb).weak, 2.0 / static_cast<double>(res));
    EXPECT_NEAR(out.mass(), 1.0, 1e-12);
  }
}

TEST(MeanField, GridStepConservesMass) {
  MeanFieldParams p;
  p.gamma = Rational(3, 10);
  std::vector<double> f(50);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + 0.5 * static_cast<double>(i % 7) / 6.0;
  GridMeasure mu(f, Boundary::periodic);
  mu *= 1.0 / mu.mass();
  auto tr = mean_field_iterate(mu, p, 5, 16);
  ASSERT_EQ(tr.measures.size(), 6u);
  for (const auto& m : tr.measures) {
    EXPECT_NEAR(m.mass(), 1.0, 1e-12);
    EXPECT_TRUE(m.nonnegative());
  }
}

TEST(MeanField, GammaOneIsPlainPush) {
  MeanFieldParams p;
  p.gamma = 1;
  std::vector<double> f{4, 0, 0, 0};
  auto out = mean_field_step(GridMeasure(f, Boundary::periodic), p);
  EXPECT_EQ(out.densities(), (std::vector<double>{2, 2, 0, 0}));
}

TEST(MeanField, ParamsValidated) {
  MeanFieldParams p;
  p.epsilon = Rational(1, 3);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.epsilon = Rational(1, 10);
  p.gamma = 2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
