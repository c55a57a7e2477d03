#include <gtest/gtest.h>

#include <vector>

#include "fixtures.hpp"
#include "proxyshift/baselines.hpp"
#include "proxyshift/errors.hpp"

using namespace proxyshift;

namespace {

Dataset small() {
  Dataset ds;
  ds.dims.k_E = 2;
  ds.dims.k_U = 2;
  ds.dims.k_W = 2;
  ds.dims.k_X = 2;
  ds.dims.k_Y = 2;
  // (e, w, x, y)
  ds.records = {{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}, {1, 1, 0, 0},
                {1, 1, 1, 1}, {1, 0, 1, 0}, {kTargetDomain, 0, std::nullopt, std::nullopt}};
  return ds;
}

}  // namespace

TEST(Oracle, Frequency) {
  const std::vector<std::size_t> draws{0, 1, 1, 0, 1};
  EXPECT_DOUBLE_EQ(oracle_estimate(draws, 1), 0.6);
  EXPECT_THROW(oracle_estimate(std::vector<std::size_t>{}, 0), InvalidInput);
}

TEST(NoAdjustment, HandCount) {
  // X = 0 among sources: 4 records, 3 with Y = 0.
  EXPECT_DOUBLE_EQ(no_adjustment(small(), 0, 0), 0.75);
  EXPECT_DOUBLE_EQ(no_adjustment(small(), 1, 1), 0.5);
  EXPECT_THROW(no_adjustment(small(), 2, 0), InvalidInput);
}

TEST(WAdjustment, HandCount) {
  // Source W marginals: w0 3/6, w1 3/6. p(y0 | x0, w0) = 1/2, p(y0 | x0, w1) = 1.
  EXPECT_DOUBLE_EQ(w_adjustment(small(), 0, 0), 0.5 * 0.5 + 1.0 * 0.5);
}

TEST(WAdjustment, EmptyStratum) {
  Dataset ds = small();
  ds.records = {{0, 0, 0, 0}, {0, 1, 1, 0}};
  EXPECT_THROW(w_adjustment(ds, 0, 0), EmptyCellError);
  ds.records = {{0, 0, 0, 0}, {0, 0, 0, 1}};
  EXPECT_DOUBLE_EQ(w_adjustment(ds, 0, 0), 0.5);  // w1 absent, skipped
}

TEST(TargetScope, MatchesTargetConditional) {
  Rng rng(1);
  const ScmSpec s = fixtures::well_conditioned_spec();
  const SimulatedSample sample = simulate_with_hidden(s, 200000, rng);
  EXPECT_NEAR(no_adjustment(sample.hidden, 0, 0), target_conditional(s, 0, 0), 0.01);
  // With the oracle draws: frequency is close to the interventional truth.
  const auto draws = interventional_sample(s, 0, 200000, rng);
  EXPECT_NEAR(oracle_estimate(draws, 0), true_effect(s, 0, 0), 0.01);
  const double w = w_adjustment(sample.hidden, 0, 0);
  EXPECT_GE(w, 0.0);
  EXPECT_LE(w, 1.0);
}

TEST(Wald, Interval) {
  const ConfidenceInterval ci = wald_interval(0.5, 100, 0.05);
  EXPECT_NEAR(ci.upper - 0.5, 1.959963984540054 * 0.05, 1e-12);
  const ConfidenceInterval edge = wald_interval(0.99, 10, 0.05);
  EXPECT_EQ(edge.upper, 1.0);
  EXPECT_GT(edge.upper_unclipped, 1.0);
  EXPECT_THROW(wald_interval(0.5, 0, 0.05), InvalidInput);
}
