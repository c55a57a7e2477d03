#pragma once

// Population-level identification of q(y | do(x)) from source-domain
// conditionals and the target-domain proxy law:
//
//   q(y | do(x)) = P(y|E,x) P(W|E,x)^+ Q(W),
//
// where ^+ is the right pseudo-inverse, plus the latent-parameter
// decomposition and the observed-covariate extension.

#include <optional>
#include <span>
#include <vector>

#include "proxyshift/linalg.hpp"

namespace proxyshift {

struct IdentifyOptions {
  double rank_tol = kRankTol;
  // Opt-in ridge: use A^T (A A^T + delta I)^{-1}. Off by default because a
  // rank-deficient P(W|E,x) means the effect is genuinely not identified.
  std::optional<double> ridge;
};

/// Throws RankDeficiencyError (with the condition number) when p_w_ex does
/// not have linearly independent rows and no ridge is requested.
double identify_effect(const RowVector& p_y_ex, const Matrix& p_w_ex, const Vector& q_w,
                       const IdentifyOptions& opts = {});

/// sum_u [sum_w p(y|u,w,x) p(w|u)] q(u). `p_y_uw` is the k_U x k_W array of
/// p(y | u, w, x) for the fixed (x, y).
double causal_decomposition_effect(const Matrix& p_y_uw, const Matrix& p_w_u, const Vector& q_u);

/// Per-stratum inputs for the observed-covariate extension.
struct CovariateStratum {
  RowVector p_y_exz;  // p(y | e, x, z)
  Matrix p_w_exz;     // p(w | e, x, z)
  Vector q_w_z;       // q(w | z)
};

/// q(y | do(x), z); errors name the stratum (1-based).
double identify_conditional_effect(const CovariateStratum& stratum, std::size_t z_index,
                                   const IdentifyOptions& opts = {});

/// sum_z q(y | do(x), z) q(z).
double identify_total_effect_with_covariate(std::span<const CovariateStratum> strata, const Vector& q_z,
                                            const IdentifyOptions& opts = {});

}  // namespace proxyshift
