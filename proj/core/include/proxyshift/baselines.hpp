#pragma once

// Comparison estimators: the interventional oracle, the unadjusted
// conditional, and adjustment for W as if it were the confounder. The
// target-scope variants take TargetOutcomes, which only the simulator
// produces, so the regular pipeline cannot reach them by accident.

#include <cstddef>
#include <span>

#include "proxyshift/estimate.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift {

/// Empirical frequency of y among interventional draws.
double oracle_estimate(std::span<const std::size_t> y_draws, std::size_t y);

/// #(Y=y, X=x) / #(X=x) over pooled source records.
double no_adjustment(const Dataset& ds, std::size_t x, std::size_t y);
/// Same ratio over target units (benchmark-only).
double no_adjustment(const TargetOutcomes& target, std::size_t x, std::size_t y);

/// sum_j #(Y=y, X=x, W=w_j) / #(X=x, W=w_j) * #(W=w_j) / n over pooled
/// source records; proxy levels with zero marginal are skipped.
double w_adjustment(const Dataset& ds, std::size_t x, std::size_t y);
double w_adjustment(const TargetOutcomes& target, std::size_t x, std::size_t y);

/// Normal-approximation interval p -+ z sqrt(p (1 - p) / n), clipped.
ConfidenceInterval wald_interval(double p, std::size_t n, double alpha);

}  // namespace proxyshift
