#include "proxyshift/estimate.hpp"

#include <algorithm>

namespace proxyshift {

EffectEstimate clipped_estimate(double point_unclipped, std::optional<double> half_width, double alpha) {
  EffectEstimate est;
  est.point_unclipped = point_unclipped;
  est.point = std::clamp(point_unclipped, 0.0, 1.0);
  est.flags.clipped_point = est.point != point_unclipped;
  if (half_width) {
    ConfidenceInterval ci;
    ci.alpha = alpha;
    ci.lower_unclipped = point_unclipped - *half_width;
    ci.upper_unclipped = point_unclipped + *half_width;
    ci.lower = std::clamp(ci.lower_unclipped, 0.0, 1.0);
    ci.upper = std::clamp(ci.upper_unclipped, 0.0, 1.0);
    est.flags.clipped_ci = ci.lower != ci.lower_unclipped || ci.upper != ci.upper_unclipped;
    est.ci = ci;
  }
  return est;
}

}  // namespace proxyshift
