#pragma once

// Causal-parametrisation maximum-likelihood estimator. Every conditional of
// the latent model is parametrised by unconstrained logits mapped through a
// per-column softmax; the observed-data likelihood is maximised with L-BFGS
// and q(y | do(x)) is read off the fitted latent components.

#include <cstddef>
#include <cstdint>
#include <optional>

#include "proxyshift/estimate.hpp"
#include "proxyshift/lbfgs.hpp"
#include "proxyshift/linalg.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift {

/// Offsets of the logit blocks, in the order U|E, Q(U), W|U, X|U, Y|U,W,X.
/// Within a block, entries of one softmax column are contiguous.
struct ThetaLayout {
  CategorySpec dims;

  std::size_t u_given_e() const { return 0; }
  std::size_t q_u() const { return dims.k_U * dims.k_E; }
  std::size_t w_given_u() const { return q_u() + dims.k_U; }
  std::size_t x_given_u() const { return w_given_u() + dims.k_W * dims.k_U; }
  std::size_t y_given_uwx() const { return x_given_u() + dims.k_X * dims.k_U; }
  std::size_t size() const { return y_given_uwx() + dims.k_Y * dims.k_U * dims.k_W * dims.k_X; }
};

/// Raw logits of the latent model.
struct ThetaParams {
  ThetaLayout layout;
  Vector logits;
};

/// Softmax view: strictly positive column-stochastic conditionals.
struct ThetaProbabilities {
  CategorySpec dims;
  Matrix p_u_given_e;    // k_U x k_E
  Vector q_u;            // k_U
  Matrix p_w_given_u;    // k_W x k_U
  Matrix p_x_given_u;    // k_X x k_U
  Matrix p_y_given_uwx;  // k_Y x (k_U k_W k_X), column u + k_U (w + k_W x)

  double p_y(std::size_t y, std::size_t u, std::size_t w, std::size_t x) const {
    return p_y_given_uwx(static_cast<Eigen::Index>(y),
                         static_cast<Eigen::Index>(u + dims.k_U * (w + dims.k_W * x)));
  }

  /// The equivalent ScmSpec (uniform domain prior).
  ScmSpec to_spec() const;
};

/// Throws InvalidInput on non-finite logits or a length mismatch.
ThetaProbabilities logits_to_theta(const ThetaParams& theta);

/// Logits whose softmax reproduces the spec's conditionals (log-probabilities).
ThetaParams logits_from_spec(const ScmSpec& spec);

/// Observed-data log-likelihood; zero counts contribute nothing.
double log_likelihood(const ThetaProbabilities& theta, const ContingencyCounts& counts);

/// Log-likelihood and its analytic gradient with respect to the logits.
double log_likelihood_with_gradient(const ThetaParams& theta, const ContingencyCounts& counts, Vector& grad);

struct FitOptions {
  std::size_t max_iterations = 50000;
  std::size_t restarts = 1;
  double grad_tol = 1e-8;  // on the per-unit average negative log-likelihood
  std::uint64_t seed = 0;
  // Fit dimension for U when different from the data's k_U.
  std::optional<std::size_t> k_U;
};

struct CausalFit {
  ThetaParams theta;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t restart_index = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  bool improved = true;  // false when no restart moved off its start
};

/// Initial logits are i.i.d. U[0, 1] from derive_seed(seed, restart).
/// Returns the best fit across restarts.
CausalFit fit_causal(const ContingencyCounts& counts, const FitOptions& opts = {});

/// diag(P(y|U,W,x) P(W|U)) Q(U) under theta.
double g_of_theta(const ThetaProbabilities& theta, std::size_t x, std::size_t y);

/// Point estimate only; no interval is available for this estimator.
EffectEstimate causal_estimate(const ContingencyCounts& counts, std::size_t x, std::size_t y,
                               const FitOptions& opts = {});
EffectEstimate causal_estimate(const Dataset& ds, std::size_t x, std::size_t y, const FitOptions& opts = {});

}  // namespace proxyshift
