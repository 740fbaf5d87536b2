#include "cml/interactions.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cml;

namespace {

InteractionRule threshold(Rational eps, Rational gamma) {
  InteractionRule r;
  r.mode = InteractionMode::threshold;
  r.epsilon = eps;
  r.gamma = gamma;
  return r;
}

}  // namespace

TEST(Interactions, RigidPairJumpsToMidpoint) {
  const Space interval{Topology::interval, 1};
  auto cfg = ExactConfiguration::line({Rational(1, 10), Rational(21, 200)});
  auto out = apply_interaction(cfg, interval, threshold(Rational(1, 100), 0));
  EXPECT_EQ(out[0][0], Rational(41, 400));
  EXPECT_EQ(out[1][0], Rational(41, 400));
}

TEST(Interactions, SoftPairMovesPartway) {
  const Space interval{Topology::interval, 1};
  auto cfg = ExactConfiguration::line({Rational(0), Rational(1, 100)});
  auto out = apply_interaction(cfg, interval, threshold(Rational(1, 50), Rational(2, 5)));
  // 2/5 * 0 + 3/5 * 1/200
  EXPECT_EQ(out[0][0], Rational(3, 1000));
  EXPECT_EQ(out[1][0], Rational(7, 1000));
}

TEST(Interactions, CircleAveragesAcrossZero) {
  const Space circle{Topology::circle, 1};
  auto cfg = ExactConfiguration::line({Rational(199, 200), Rational(1, 200)});
  auto out = apply_interaction(cfg, circle, threshold(Rational(1, 50), 0));
  EXPECT_EQ(out[0][0], Rational(0));
  EXPECT_EQ(out[1][0], Rational(0));
}

TEST(Interactions, SynchronousUpdateUsesFrozenInput) {
  // 0 -- 1 -- 2 chained at distance eps; the middle particle sees both.
  const Space interval{Topology::interval, 1};
  auto cfg = ExactConfiguration::line({Rational(1, 10), Rational(2, 10), Rational(3, 10)});
  auto out = apply_interaction(cfg, interval, threshold(Rational(1, 10), 0));
  EXPECT_EQ(out[0][0], Rational(3, 20));
  EXPECT_EQ(out[1][0], Rational(1, 5));
  EXPECT_EQ(out[2][0], Rational(1, 4));
}

TEST(Interactions, RigidClusterIsBitIdentical) {
  const Space circle{Topology::circle, 1};
  auto cfg = Configuration::line({0.1, 0.103, 0.107});
  auto out = apply_interaction(cfg, circle, threshold(Rational(1, 100), 0));
  EXPECT_EQ(out[0][0], out[1][0]);
  EXPECT_EQ(out[1][0], out[2][0]);
}

TEST(Interactions, ClosestModeKeepsOnlyNearest) {
  const Space interval{Topology::interval, 1};
  InteractionRule r = threshold(Rational(1, 5), 0);
  r.mode = InteractionMode::closest;
  auto cfg = ExactConfiguration::line({Rational(1, 10), Rational(2, 10), Rational(25, 100)});
  auto sets = neighbor_sets(cfg, interval, r);
  EXPECT_EQ(sets[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(sets[1], (std::vector<std::size_t>{1, 2}));
}

TEST(Interactions, DiffusiveUsesAdjacencyOnly) {
  const Space interval{Topology::interval, 1};
  InteractionRule r;
  r.mode = InteractionMode::diffusive;
  r.gamma = Rational(1, 2);
  r.adjacency = Adjacency{{1}, {0}, {2}};
  auto cfg = ExactConfiguration::line({Rational(0), Rational(1, 2), Rational(9, 10)});
  auto out = apply_interaction(cfg, interval, r);
  EXPECT_EQ(out[0][0], Rational(1, 4));
  EXPECT_EQ(out[1][0], Rational(1, 4));
  EXPECT_EQ(out[2][0], Rational(9, 10));
}

TEST(Interactions, IndicatorPotentialMatchesThreshold) {
  const Space interval{Topology::interval, 1};
  InteractionRule pot = threshold(Rational(1, 10), Rational(1, 2));
  pot.mode = InteractionMode::potential;
  pot.potential = SampledPotential::indicator();
  auto cfg = Configuration::line({0.30, 0.35, 0.70});
  auto a = apply_interaction(cfg, interval, pot);
  auto b = apply_interaction(cfg, interval, threshold(Rational(1, 10), Rational(1, 2)));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i][0], b[i][0], 1e-15);
}

TEST(Interactions, CenterOfGravityPreservedByRigidCluster) {
  const Space interval{Topology::interval, 1};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k(0, 999);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Rational> xs;
    Rational base(k(rng), 2000);
    for (int i = 0; i < 5; ++i) xs.push_back(base + Rational(k(rng), 200000));
    auto cfg = ExactConfiguration::line(xs);
    auto out = apply_interaction(cfg, interval, threshold(Rational(1, 100), 0));
    Rational before(0), after(0);
    for (std::size_t i = 0; i < 5; ++i) {
      before += cfg[i][0];
      after += out[i][0];
    }
    EXPECT_EQ(before, after);
    EXPECT_EQ(diameter(out, interval), 0);
  }
}

TEST(Interactions, ClustersMatchTransitiveClosure) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 8);
  for (auto topo : {Topology::interval, Topology::circle}) {
    const Space space{topo, 1};
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> xs(static_cast<std::size_t>(size(rng)));
      for (auto& x : xs) x = u(rng);
      auto cfg = Configuration::line(xs);
      const double eps = 0.3 * u(rng);
      EXPECT_EQ(epsilon_chain_clusters(cfg, space, eps), oracle::closure_clusters(cfg, space, eps));
    }
  }
}

TEST(Interactions, BlockMatrixShape) {
  auto g = interaction_block_matrix(3, 0.25);
  EXPECT_DOUBLE_EQ(g(0, 0), 0.25 + 0.75 / 3);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.25);
  EXPECT_NEAR(g.row(1).sum(), 1.0, 1e-15);
}

TEST(Interactions, ValidateRejectsBadRules) {
  InteractionRule r = threshold(Rational(-1, 10), 0);
  EXPECT_THROW(r.validate(2), std::invalid_argument);
  r = threshold(Rational(1, 10), Rational(3, 2));
  EXPECT_THROW(r.validate(2), std::invalid_argument);
  r = threshold(Rational(1, 10), 0);
  r.mode = InteractionMode::diffusive;
  EXPECT_THROW(r.validate(2), std::invalid_argument);
}
