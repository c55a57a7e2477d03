#pragma once

// Reduced-parametrisation plug-in estimator with delta-method and bootstrap
// confidence intervals.
//
// For a fixed (x, y) every unit i contributes an indicator vector eta_i:
//
//   [ 1(W=w_j, E=e_T)          j = 1..k_W-1
//     1(E=e_T)
//     1(W=w_j, X=x, E=e_l)     l = 1..k_E, j = 1..k_W-1 (j fastest)
//     1(Y=y, X=x, E=e_l)       l = 1..k_E
//     1(X=x, E=e_l) ]          l = 1..k_E
//
// of length k_W + (k_W + 1) k_E. The estimate is h(mean eta), where h
// rebuilds Q(W), P(W|E,x), P(y|E,x) by ratios and applies the
// identification formula.

#include <cstddef>
#include <cstdint>

#include "proxyshift/estimate.hpp"
#include "proxyshift/linalg.hpp"
#include "proxyshift/rng.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift {

/// Index arithmetic for the eta layout above.
struct EtaLayout {
  std::size_t k_W = 1;
  std::size_t k_E = 1;

  std::size_t size() const { return k_W + (k_W + 1) * k_E; }
  std::size_t q_w(std::size_t j) const { return j; }  // j < k_W - 1
  std::size_t q_target() const { return k_W - 1; }
  std::size_t p_wx(std::size_t j, std::size_t l) const { return k_W + l * (k_W - 1) + j; }  // j < k_W - 1
  std::size_t p_yx(std::size_t l) const { return k_W + (k_W - 1) * k_E + l; }
  std::size_t p_x(std::size_t l) const { return k_W + k_W * k_E + l; }
};

struct EtaVector {
  EtaLayout layout;
  Vector values;      // sample means of the indicators
  Matrix covariance;  // unbiased sample covariance of the indicators
  std::uint64_t n = 0;
};

EtaVector eta_from_counts(const ContingencyCounts& counts, std::size_t x, std::size_t y);
EtaVector eta_from_dataset(const Dataset& ds, std::size_t x, std::size_t y);

/// The matrices h assembles from eta.
struct EtaMatrices {
  Vector q_w;
  Matrix p_w_ex;
  RowVector p_y_ex;
};

/// Throws EmptyCellError when q(e_T) or some p(x, e_l) is zero.
EtaMatrices matrices_from_eta(const EtaLayout& layout, const Vector& eta);

/// h(eta). Throws EmptyCellError or RankDeficiencyError.
double h_of_eta(const EtaLayout& layout, const Vector& eta, double rank_tol = kRankTol);

/// Central finite-difference gradient of h with per-coordinate step
/// step_scale * max(1e-6, 1e-6 |eta_i|).
Vector grad_h(const EtaLayout& layout, const Vector& eta, double rank_tol = kRankTol, double step_scale = 1.0);

struct ReducedOptions {
  double alpha = 0.05;
  double rank_tol = kRankTol;
  bool with_ci = true;
};

/// Added to every p(w_j, x, e_l) component when the estimated P(W|E,x)
/// is rank-deficient.
inline constexpr double kRankPerturbation = 1e-9;

EffectEstimate reduced_estimate(const ContingencyCounts& counts, std::size_t x, std::size_t y,
                                const ReducedOptions& opts = {});
EffectEstimate reduced_estimate(const Dataset& ds, std::size_t x, std::size_t y, const ReducedOptions& opts = {});

struct BootstrapInterval {
  double lower = 0.0;
  double upper = 0.0;
  double lower_unclipped = 0.0;
  double upper_unclipped = 0.0;
  double sigma_boot = 0.0;
  double point_unclipped = 0.0;
  std::size_t failed_resamples = 0;
};

/// Normal-approximation bootstrap: B resamples of n units with replacement
/// (drawn as a multinomial over contingency cells), sigma_B = sample sd of
/// the resample estimates, interval point +- z sigma_B clipped to [0, 1].
/// Aborts with Error when more than 10% of resamples fail.
BootstrapInterval bootstrap_ci(const ContingencyCounts& counts, std::size_t x, std::size_t y, std::size_t B,
                               double alpha, Rng& rng, double rank_tol = kRankTol);
BootstrapInterval bootstrap_ci(const Dataset& ds, std::size_t x, std::size_t y, std::size_t B, double alpha,
                               Rng& rng, double rank_tol = kRankTol);

}  // namespace proxyshift
