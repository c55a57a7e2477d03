#pragma once

// Shared test fixtures and brute-force oracles. The oracles deliberately
// take a different computational path from the library (full joint
// enumeration instead of matrix formulas).

#include <cstddef>
#include <vector>

#include "proxyshift/identify.hpp"
#include "proxyshift/rng.hpp"
#include "proxyshift/scm.hpp"

namespace fixtures {

using proxyshift::Matrix;
using proxyshift::Rng;
using proxyshift::ScmSpec;
using proxyshift::Vector;

/// Counterexample model with rank-2 P(W|U) and p(y|u,x) = (0.5, 0.2, 0.3)
/// for (x, y) = (0, 0). Variant 1 has q(U) = (0.6, 0.3, 0.1), variant 2
/// has (0.5, 0.33, 0.17); all other components are shared.
ScmSpec counterexample_spec(int variant);

/// k_E = 2, k_U = k_W = k_X = k_Y = 2 with kappa(P(W|E,x)) well below 20.
ScmSpec well_conditioned_spec();

/// Flat-Dirichlet model; thin wrapper over sample_scm_spec.
ScmSpec random_spec(std::size_t k_E, std::size_t k_U, std::size_t k_W, std::size_t k_X, std::size_t k_Y, Rng& rng);

/// q(y | do(x)) by enumerating the target joint q(u, w, x, y), forming
/// q(y | u, x) by division, and applying the adjustment formula over u.
double brute_force_effect(const ScmSpec& spec, std::size_t x, std::size_t y);

/// Observational target conditional q(y | x) from the same enumeration.
double brute_force_target_conditional(const ScmSpec& spec, std::size_t x, std::size_t y);

/// Model with an observed covariate Z, edges E->U, E->Z, E->X, U->{W,X,Y,Z},
/// Z->{W,X,Y}, W->Y, X->Y. Domain index k_E is the target.
struct ExtendedScm {
  std::size_t k_E, k_U, k_W, k_X, k_Y, k_Z;
  Matrix p_u_e;                  // k_U x (k_E + 1)
  std::vector<Matrix> p_z_ue;    // [e]: k_Z x k_U
  std::vector<Matrix> p_w_uz;    // [z]: k_W x k_U
  std::vector<std::vector<Matrix>> p_x_uze;  // [e][z]: k_X x k_U
  // [x][z][w]: k_Y x k_U
  std::vector<std::vector<std::vector<Matrix>>> p_y_uwxz;

  double joint(std::size_t e, std::size_t u, std::size_t z, std::size_t w, std::size_t x, std::size_t y) const;
};

ExtendedScm random_extended(std::size_t k_E, std::size_t k_U, std::size_t k_W, std::size_t k_Z, Rng& rng);

/// Per-stratum (P(y|E,x,z), P(W|E,x,z), Q(W|z)) and Q(Z), by enumeration.
std::vector<proxyshift::CovariateStratum> extended_strata(const ExtendedScm& m, std::size_t x, std::size_t y,
                                                          Vector& q_z);

/// sum_z sum_u p(y|u,x,z) q(u|z) q(z).
double extended_brute_force(const ExtendedScm& m, std::size_t x, std::size_t y);

/// Random column-stochastic k_W x k_E matrix whose rows are dependent:
/// `rank` independent rows, the rest non-negative mixtures or duplicates.
Matrix random_rank_deficient(std::size_t k_W, std::size_t k_E, std::size_t rank, Rng& rng);

}  // namespace fixtures
