#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fixtures.hpp"
#include "proxyshift/errors.hpp"
#include "proxyshift/harness.hpp"

using namespace proxyshift;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.M = 2;
  c.N = 2;
  c.n = 3000;
  c.seed = 42;
  return c;
}

bool same(const ReplicateRecord& a, const ReplicateRecord& b) {
  auto eq = [](double u, double v) { return (std::isnan(u) && std::isnan(v)) || u == v; };
  return a.model == b.model && a.dataset == b.dataset && a.estimator == b.estimator && a.n == b.n &&
         eq(a.estimate, b.estimate) && eq(a.estimate_unclipped, b.estimate_unclipped) && a.truth == b.truth &&
         eq(a.kappa_hat, b.kappa_hat) && a.ci_lower == b.ci_lower && a.ci_upper == b.ci_upper &&
         a.covered == b.covered && a.status == b.status;
}

}  // namespace

TEST(Estimators, NamesRoundTrip) {
  for (auto k : {EstimatorKind::Oracle, EstimatorKind::Reduced, EstimatorKind::Causal, EstimatorKind::NoAdj,
                 EstimatorKind::NoAdjTarget, EstimatorKind::WAdj, EstimatorKind::WAdjTarget}) {
    EXPECT_EQ(parse_estimator(estimator_name(k)), k);
  }
  EXPECT_THROW(parse_estimator("ols"), InvalidInput);
}

TEST(Config, Validate) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.M = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.x = 5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.n_sweep = {1000, 2000};
  EXPECT_EQ(c.sample_sizes().size(), 2u);
}

TEST(PointError, RecordCount) {
  ExperimentConfig c;
  c.n = 2000;
  const auto rec = run_point_error(c);
  ASSERT_EQ(rec.size(), 2u);
  std::set<std::string> names{rec[0].estimator, rec[1].estimator};
  EXPECT_EQ(names, (std::set<std::string>{"causal", "reduced"}));
  for (const auto& r : rec) {
    EXPECT_EQ(r.n, 2000u);
    if (r.ok()) EXPECT_NEAR(r.abs_error, std::abs(r.estimate - r.truth), 1e-15);
  }
  c = small_config();
  c.n_sweep = {1000, 2000};
  EXPECT_EQ(run_point_error(c).size(), 2u * 2u * 2u * 2u);
}

TEST(PointError, IndependentOfWorkerCount) {
  ExperimentConfig c = small_config();
  c.workers = 1;
  const auto a = run_point_error(c);
  c.workers = 8;
  const auto b = run_point_error(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same(a[i], b[i])) << i;
  // Records are ordered by (n, model, dataset, estimator).
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const auto& u, const auto& v) {
    return std::tie(u.n, u.model, u.dataset, u.estimator) < std::tie(v.n, v.model, v.dataset, v.estimator);
  }));
}

TEST(PointError, SeedChangesOutput) {
  ExperimentConfig c = small_config();
  const auto a = run_point_error(c);
  c.seed = 43;
  const auto b = run_point_error(c);
  EXPECT_NE(a[0].truth, b[0].truth);
}

TEST(DrawModels, FilterAndBudget) {
  ExperimentConfig c = small_config();
  c.M = 3;
  const auto models = draw_models(c, true);
  ASSERT_EQ(models.size(), 3u);
  for (const auto& m : models) EXPECT_GT(std::abs(m.truth - m.target_conditional), c.filter_threshold);
  c.filter_threshold = 2.0;  // impossible
  c.draw_budget = 3;
  EXPECT_THROW(draw_models(c, true), Error);
}

TEST(DrawModels, FixedModel) {
  ExperimentConfig c = small_config();
  c.fixed_model = fixtures::well_conditioned_spec();
  const auto models = draw_models(c, false);
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].truth, true_effect(*c.fixed_model, 0, 0));
  EXPECT_EQ(models[1].truth, models[0].truth);
}

TEST(Baselines, AllEstimatorsPresent) {
  ExperimentConfig c = small_config();
  c.M = 1;
  c.N = 1;
  c.filter_threshold = 0.0;
  const auto rec = run_baseline_comparison(c);
  std::set<std::string> names;
  for (const auto& r : rec) names.insert(r.estimator);
  EXPECT_EQ(names.size(), 7u);
}

TEST(Coverage, BootstrapRecordsAndSummary) {
  ExperimentConfig c = small_config();
  c.fixed_model = fixtures::well_conditioned_spec();
  c.bootstrap = 50;
  const CoverageResult res = run_coverage(c);
  EXPECT_EQ(res.records.size(), 2u * 2u * 2u);
  for (const auto& r : res.records) {
    if (!r.ok()) continue;
    ASSERT_TRUE(r.ci_lower && r.ci_upper && r.covered);
    EXPECT_EQ(*r.covered, *r.ci_lower <= r.truth && r.truth <= *r.ci_upper);
  }
  ASSERT_EQ(res.summary.size(), 2u);
  for (const auto& s : res.summary) {
    EXPECT_TRUE(s.coverage.has_value());
    EXPECT_TRUE(s.median_ci_length.has_value());
  }
}

TEST(Runtime, Repetitions) {
  ExperimentConfig c = small_config();
  c.runtime_repetitions = 3;
  c.estimators = {EstimatorKind::NoAdj, EstimatorKind::Reduced};
  const RuntimeResult res = run_runtime(c);
  EXPECT_EQ(res.records.size(), 6u);
  ASSERT_EQ(res.summary.size(), 2u);
  for (const auto& s : res.summary) EXPECT_GE(s.total_wall_seconds, 0.0);
}

TEST(Summarize, MediansAndFailures) {
  std::vector<ReplicateRecord> rec(4);
  for (std::size_t i = 0; i < 4; ++i) {
    rec[i].estimator = "reduced";
    rec[i].n = 100;
    rec[i].abs_error = static_cast<double>(i + 1) / 10;
    rec[i].wall_seconds = 1.0;
  }
  rec[3].status = "rank deficient";
  rec.push_back(rec[0]);
  rec.back().n = 50;
  const auto rows = summarize(rec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].n, 50u);
  EXPECT_EQ(rows[1].count, 3u);
  EXPECT_EQ(rows[1].failures, 1u);
  EXPECT_NEAR(rows[1].median_abs_error, 0.2, 1e-15);
  EXPECT_NEAR(rows[1].mean_abs_error, 0.2, 1e-15);
  EXPECT_FALSE(rows[1].coverage.has_value());
}

TEST(ParallelFor, CoversRangeAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}
