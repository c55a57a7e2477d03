#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "proxyshift/errors.hpp"
#include "proxyshift/identify.hpp"
#include "proxyshift/proxy.hpp"

using namespace proxyshift;

TEST(ReduceProxy, FullRankIsIdentity) {
  Matrix m(2, 2);
  m << 0.3, 0.6, 0.7, 0.4;
  const ProxyMapping p = reduce_proxy(m);
  EXPECT_TRUE(p.is_identity());
  EXPECT_EQ(p.target_cardinality, 2u);
  EXPECT_EQ(p.assignment, (std::vector<std::size_t>{0, 1}));
}

TEST(ReduceProxy, HandExample) {
  Matrix m(3, 2);
  m << 0.2, 0.4, 0.4, 0.2, 0.4, 0.4;
  const ProxyMapping p = reduce_proxy(m);
  ASSERT_EQ(p.merges.size(), 1u);
  EXPECT_EQ(p.merges[0].absorbed, 2u);
  EXPECT_EQ(p.merges[0].into, 0u);
  EXPECT_NEAR(p.merges[0].coefficient, 2.0 / 3.0, 1e-12);
  Matrix expected(2, 2);
  expected << 0.6, 0.8, 0.4, 0.2;
  EXPECT_LT((p.apply_rows(m) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(p.replay(), p.assignment);
}

TEST(ReduceProxy, CounterexampleStructure) {
  Matrix pwu(3, 3);
  pwu << 0.23, 0.3, 0.2, 0.46, 0.6, 0.4, 0.31, 0.1, 0.4;
  const ProxyMapping p = reduce_proxy(pwu);
  EXPECT_EQ(p.target_cardinality, 2u);
  EXPECT_EQ(numeric_row_rank(p.apply_rows(pwu)), 2u);
}

TEST(ReduceProxy, SoundnessOnRandomRankDeficient) {
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const std::size_t k_W = 3 + i % 3, rank = 1 + i % (k_W - 1);
    const Matrix m = fixtures::random_rank_deficient(k_W, k_W + 1, rank, rng);
    const ProxyMapping p = reduce_proxy(m);
    const Matrix merged = p.apply_rows(m);
    EXPECT_EQ(static_cast<std::size_t>(merged.rows()), numeric_row_rank(m));
    EXPECT_EQ(numeric_row_rank(merged), numeric_row_rank(m));
    for (Eigen::Index c = 0; c < merged.cols(); ++c) EXPECT_NEAR(merged.col(c).sum(), 1.0, 1e-12);
    EXPECT_EQ(p.replay(), p.assignment);
  }
}

TEST(ProxyMapping, AppliesToDataset) {
  Matrix m(3, 2);
  m << 0.2, 0.4, 0.4, 0.2, 0.4, 0.4;
  const ProxyMapping p = reduce_proxy(m);
  Dataset ds;
  ds.dims.k_E = 2;
  ds.dims.k_W = 3;
  ds.dims.k_X = 2;
  ds.dims.k_Y = 2;
  ds.records = {{0, 2, 1, 0}, {kTargetDomain, 1, std::nullopt, std::nullopt}};
  const Dataset out = p.apply(ds);
  EXPECT_EQ(out.dims.k_W, 2u);
  EXPECT_EQ(out.records[0].w, 0u);
  EXPECT_EQ(out.records[1].w, 1u);
}

TEST(Discretize, PriceBins) {
  Partition p;
  p.cuts = {75, 125, 175, 225};
  p.lower = 0;
  const std::vector<double> values{50, 100, 300, 75, 75.0001};
  EXPECT_EQ(discretize_proxy(values, p), (std::vector<std::size_t>{1, 2, 5, 1, 2}));
}

TEST(Discretize, SingleBinAndSingletons) {
  Partition one;
  const std::vector<double> v{-3, 0, 1e9};
  EXPECT_EQ(discretize_proxy(v, one), (std::vector<std::size_t>{1, 1, 1}));
  Partition singles;
  singles.cuts = {1, 2};
  const std::vector<double> d{1, 2, 3, 2};
  EXPECT_EQ(discretize_proxy(d, singles), (std::vector<std::size_t>{1, 2, 3, 2}));
}

TEST(Discretize, OutOfSupport) {
  Partition p;
  p.cuts = {1};
  p.lower = 0;
  p.upper = 2;
  const std::vector<double> v{2.5};
  try {
    discretize_proxy(v, p);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("2.5"), std::string::npos) << e.what();
  }
  p.cuts = {1, 1};
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(SearchPartition, DiscreteProxyUnchanged) {
  // P(W|E,x) = [[0.3, 0.6], [0.7, 0.4]] as weights on values 1 and 2.
  std::vector<ProxyObservation> obs{{1, 0, 0, 0.3}, {2, 0, 0, 0.7}, {1, 0, 1, 0.6}, {2, 0, 1, 0.4}};
  const auto r = search_partition(obs, 1, 2, 2, 4);
  EXPECT_EQ(r.partition.cuts, (std::vector<double>{1}));
  const std::vector<double> values{1, 2};
  EXPECT_EQ(discretize_proxy(values, r.partition), (std::vector<std::size_t>{1, 2}));
}

TEST(SearchPartition, NoisyConfounderSplitsCentrally) {
  Rng rng(41);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<ProxyObservation> obs;
  const double a[3] = {0.2, 0.5, 0.8};
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t x = 0; x < 2; ++x) {
      const double p0 = x == 0 ? a[e] : 1 - a[e];
      for (int i = 0; i < 400; ++i) {
        const double u = i < p0 * 400 ? 0.0 : 1.0;
        obs.push_back({u + noise(rng), x, e, 1.0});
      }
    }
  const auto r = search_partition(obs, 2, 3, 2, 4);
  ASSERT_EQ(r.partition.bins(), 2u);
  EXPECT_GT(r.partition.cuts[0], -0.2);
  EXPECT_LT(r.partition.cuts[0], 1.0);
  EXPECT_GT(r.min_singular_value, 0.1);
}

TEST(SearchPartition, IndependentProxyFails) {
  std::vector<ProxyObservation> obs;
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t x = 0; x < 2; ++x)
      for (int v = 1; v <= 9; ++v) obs.push_back({v / 10.0, x, e, 1.0});
  EXPECT_THROW(search_partition(obs, 2, 3, 2, 4), Error);
}

TEST(SearchPartition, PreconditionChecked) {
  std::vector<ProxyObservation> obs{{1, 0, 0, 1.0}};
  EXPECT_THROW(search_partition(obs, 1, 1, 3, 2), InvalidInput);
}
