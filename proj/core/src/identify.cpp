#include "proxyshift/identify.hpp"

#include "proxyshift/errors.hpp"

#include <string>

namespace proxyshift {

double identify_effect(const RowVector& p_y_ex, const Matrix& p_w_ex, const Vector& q_w,
                       const IdentifyOptions& opts) {
  if (p_y_ex.size() != p_w_ex.cols()) {
    throw InvalidInput("P(y|E,x) has " + std::to_string(p_y_ex.size()) + " entries but P(W|E,x) has " +
                       std::to_string(p_w_ex.cols()) + " columns");
  }
  if (q_w.size() != p_w_ex.rows()) {
    throw InvalidInput("Q(W) has " + std::to_string(q_w.size()) + " entries but P(W|E,x) has " +
                       std::to_string(p_w_ex.rows()) + " rows");
  }
  if (opts.ridge) {
    const Matrix gram = p_w_ex * p_w_ex.transpose() +
                        *opts.ridge * Matrix::Identity(p_w_ex.rows(), p_w_ex.rows());
    const Vector solved = gram.ldlt().solve(q_w);
    return p_y_ex * (p_w_ex.transpose() * solved);
  }
  const Matrix pinv = right_pseudoinverse(p_w_ex, opts.rank_tol);
  return p_y_ex * pinv * q_w;
}

double causal_decomposition_effect(const Matrix& p_y_uw, const Matrix& p_w_u, const Vector& q_u) {
  if (p_y_uw.rows() != p_w_u.cols() || p_y_uw.cols() != p_w_u.rows() || q_u.size() != p_w_u.cols()) {
    throw InvalidInput("inconsistent dimensions in causal decomposition");
  }
  // diag(P(y|U,W,x) P(W|U)) Q(U)
  const Matrix prod = p_y_uw * p_w_u;
  return prod.diagonal().dot(q_u);
}

double identify_conditional_effect(const CovariateStratum& stratum, std::size_t z_index,
                                   const IdentifyOptions& opts) {
  try {
    return identify_effect(stratum.p_y_exz, stratum.p_w_exz, stratum.q_w_z, opts);
  } catch (const RankDeficiencyError& err) {
    throw RankDeficiencyError("stratum z=" + std::to_string(z_index + 1) + ": " + err.what(),
                              err.condition_number());
  }
}

double identify_total_effect_with_covariate(std::span<const CovariateStratum> strata, const Vector& q_z,
                                            const IdentifyOptions& opts) {
  if (static_cast<std::size_t>(q_z.size()) != strata.size()) {
    throw InvalidInput("q(z) has " + std::to_string(q_z.size()) + " entries for " +
                       std::to_string(strata.size()) + " strata");
  }
  double total = 0.0;
  for (std::size_t z = 0; z < strata.size(); ++z) {
    total += identify_conditional_effect(strata[z], z, opts) * q_z(static_cast<Eigen::Index>(z));
  }
  return total;
}

}  // namespace proxyshift
