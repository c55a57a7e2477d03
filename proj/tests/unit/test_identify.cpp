#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "proxyshift/errors.hpp"
#include "proxyshift/identify.hpp"
#include "proxyshift/scm.hpp"

using namespace proxyshift;

TEST(IdentifyEffect, HandExample) {
  Matrix p_w(2, 2);
  p_w << 0.3, 0.6, 0.7, 0.4;
  RowVector p_y(2);
  p_y << 0.62, 0.44;
  Vector q_w(2);
  q_w << 0.5, 0.5;
  EXPECT_NEAR(identify_effect(p_y, p_w, q_w), 0.5, 1e-12);
}

TEST(IdentifyEffect, AllCardinalitiesOne) {
  RowVector p_y(1);
  p_y << 0.37;
  EXPECT_NEAR(identify_effect(p_y, Matrix::Ones(1, 1), Vector::Ones(1)), 0.37, 1e-15);
}

TEST(IdentifyEffect, MatchesBruteForceOnRandomSpecs) {
  Rng rng(101);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + i % 2;
    const ScmSpec s = fixtures::random_spec(k + i % 3, k, k, 2, 2, rng);
    const PopulationViews v = population_views(s, 0, 1);
    if (condition_number(v.p_w_ex) >= 1e6) continue;
    ++checked;
    EXPECT_NEAR(identify_effect(v.p_y_ex, v.p_w_ex, v.q_w), fixtures::brute_force_effect(s, 0, 1), 1e-10);
  }
  EXPECT_GT(checked, 90);
}

TEST(IdentifyEffect, RefusesCounterexampleWithConditionNumber) {
  for (int variant : {1, 2}) {
    const PopulationViews v = population_views(fixtures::counterexample_spec(variant), 0, 0);
    try {
      identify_effect(v.p_y_ex, v.p_w_ex, v.q_w);
      FAIL() << "expected RankDeficiencyError";
    } catch (const RankDeficiencyError& e) {
      EXPECT_GT(e.condition_number(), 1e9);
      EXPECT_NE(std::string(e.what()).find("condition number"), std::string::npos);
    }
  }
}

TEST(IdentifyEffect, RidgeGivesAnAnswerOnRankDeficientInput) {
  const PopulationViews v = population_views(fixtures::counterexample_spec(1), 0, 0);
  IdentifyOptions o;
  o.ridge = 1e-8;
  const double r = identify_effect(v.p_y_ex, v.p_w_ex, v.q_w, o);
  EXPECT_TRUE(std::isfinite(r));
}

TEST(IdentifyEffect, DimensionMismatch) {
  EXPECT_THROW(identify_effect(RowVector::Ones(3), Matrix::Identity(2, 2), Vector::Ones(2) / 2), InvalidInput);
  EXPECT_THROW(identify_effect(RowVector::Ones(2), Matrix::Identity(2, 2), Vector::Ones(3) / 3), InvalidInput);
}

TEST(IdentifyEffect, PermutationOfProxyCategories) {
  Rng rng(5);
  const ScmSpec s = fixtures::random_spec(3, 3, 3, 2, 2, rng);
  const PopulationViews v = population_views(s, 1, 1);
  const Eigen::PermutationMatrix<Eigen::Dynamic> perm(Eigen::Vector3i(2, 0, 1));
  const double a = identify_effect(v.p_y_ex, v.p_w_ex, v.q_w);
  const double b = identify_effect(v.p_y_ex, perm * v.p_w_ex, perm * v.q_w);
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(CausalDecomposition, CounterexampleAndConstant) {
  const ScmSpec s = fixtures::counterexample_spec(1);
  Matrix p_y_uw(3, 3);
  for (std::size_t u = 0; u < 3; ++u)
    for (std::size_t w = 0; w < 3; ++w) p_y_uw(u, w) = s.p_y(0, u, w, 0);
  EXPECT_NEAR(causal_decomposition_effect(p_y_uw, s.p_w_given_u.matrix(), s.q_u.vector()), 0.39, 1e-14);
  EXPECT_NEAR(causal_decomposition_effect(Matrix::Constant(3, 3, 0.42), s.p_w_given_u.matrix(), s.q_u.vector()),
              0.42, 1e-15);
}

TEST(CausalDecomposition, EqualsTrueEffect) {
  Rng rng(7);
  for (int i = 0; i < 25; ++i) {
    const ScmSpec s = fixtures::random_spec(2, 3, 2, 2, 2, rng);
    Matrix p_y_uw(3, 2);
    for (std::size_t u = 0; u < 3; ++u)
      for (std::size_t w = 0; w < 2; ++w) p_y_uw(u, w) = s.p_y(1, u, w, 1);
    EXPECT_NEAR(causal_decomposition_effect(p_y_uw, s.p_w_given_u.matrix(), s.q_u.vector()), true_effect(s, 1, 1),
                1e-14);
  }
}

TEST(CovariateExtension, SingleStratumIsIdentifyEffect) {
  Rng rng(8);
  const ScmSpec s = fixtures::random_spec(3, 2, 2, 2, 2, rng);
  const PopulationViews v = population_views(s, 0, 0);
  const CovariateStratum stratum{v.p_y_ex, v.p_w_ex, v.q_w};
  const double total = identify_total_effect_with_covariate(std::span(&stratum, 1), Vector::Ones(1));
  EXPECT_EQ(total, identify_effect(v.p_y_ex, v.p_w_ex, v.q_w));
}

TEST(CovariateExtension, MatchesBruteForceOnExtendedModel) {
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const auto m = fixtures::random_extended(3, 2, 2, 2, rng);
    Vector q_z;
    const auto strata = fixtures::extended_strata(m, 1, 0, q_z);
    EXPECT_NEAR(identify_total_effect_with_covariate(strata, q_z), fixtures::extended_brute_force(m, 1, 0), 1e-10);
  }
}

TEST(CovariateExtension, IndependentCovariate) {
  // Z independent of everything: every stratum equals the plain formula.
  Rng rng(10);
  const ScmSpec s = fixtures::random_spec(3, 2, 2, 2, 2, rng);
  const PopulationViews v = population_views(s, 0, 0);
  const std::vector<CovariateStratum> strata(3, CovariateStratum{v.p_y_ex, v.p_w_ex, v.q_w});
  Vector q_z(3);
  q_z << 0.2, 0.3, 0.5;
  const double plain = identify_effect(v.p_y_ex, v.p_w_ex, v.q_w);
  for (std::size_t z = 0; z < 3; ++z) EXPECT_NEAR(identify_conditional_effect(strata[z], z), plain, 1e-10);
  EXPECT_NEAR(identify_total_effect_with_covariate(strata, q_z), plain, 1e-10);
}

TEST(CovariateExtension, ErrorNamesStratum) {
  const PopulationViews bad = population_views(fixtures::counterexample_spec(1), 0, 0);
  Rng rng(11);
  const PopulationViews good = population_views(fixtures::random_spec(3, 3, 3, 2, 2, rng), 0, 0);
  const std::vector<CovariateStratum> strata{{good.p_y_ex, good.p_w_ex, good.q_w}, {bad.p_y_ex, bad.p_w_ex, bad.q_w}};
  Vector q_z(2);
  q_z << 0.5, 0.5;
  try {
    identify_total_effect_with_covariate(strata, q_z);
    FAIL();
  } catch (const RankDeficiencyError& e) {
    EXPECT_NE(std::string(e.what()).find("z=2"), std::string::npos) << e.what();
  }
}
