#pragma once

#include <cstdint>
#include <optional>

namespace proxyshift {

struct EstimateFlags {
  bool rank_perturbed = false;
  bool clipped_point = false;
  bool clipped_ci = false;
  bool empty_cell = false;
  bool misspecified_k_u = false;

  friend bool operator==(const EstimateFlags&, const EstimateFlags&) = default;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double lower_unclipped = 0.0;
  double upper_unclipped = 0.0;
  double alpha = 0.05;

  double length() const { return upper - lower; }
  bool contains(double v) const { return lower <= v && v <= upper; }
  bool contains_unclipped(double v) const { return lower_unclipped <= v && v <= upper_unclipped; }
};

/// Point estimate of q(y | do(x)) with optional interval and diagnostics.
struct EffectEstimate {
  double point_unclipped = 0.0;
  double point = 0.0;  // clipped to [0, 1]
  std::optional<double> sigma_hat;  // asymptotic sd of sqrt(n) (estimate - truth)
  std::uint64_t n = 0;
  std::optional<ConfidenceInterval> ci;
  double kappa_hat = 0.0;  // condition number of the estimated P(W|E,x)
  EstimateFlags flags;
};

/// Clips `point` and the interval [point -+ half_width] to [0, 1].
EffectEstimate clipped_estimate(double point_unclipped, std::optional<double> half_width, double alpha);

}  // namespace proxyshift
