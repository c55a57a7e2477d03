#pragma once

// Proxy preprocessing: merging proxy categories until P(W|E,x) has linearly
// independent rows, and discretising a continuous proxy into bins.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "proxyshift/linalg.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift {

/// Surjective recoding of k_W proxy categories onto k_W_reduced categories.
struct ProxyMapping {
  struct Merge {
    std::size_t absorbed;  // original index of the dependent category
    std::size_t into;      // original index of the absorbing category
    double coefficient;    // its coefficient in the dependency relation
  };

  std::size_t source_cardinality = 0;
  std::size_t target_cardinality = 0;
  std::vector<std::size_t> assignment;  // original index -> reduced index
  std::vector<Merge> merges;

  static ProxyMapping identity(std::size_t k);

  bool is_identity() const { return merges.empty(); }

  /// Sums rows of a k_W x k_E matrix (or entries of a k_W vector) per group.
  Matrix apply_rows(const Matrix& m) const;
  Vector apply(const Vector& v) const;

  /// Recodes every record's w and shrinks dims.k_W.
  Dataset apply(const Dataset& ds) const;

  /// Rebuilds an assignment by replaying the merge log; used to check
  /// internal consistency.
  std::vector<std::size_t> replay() const;
};

/// Repeatedly absorbs a linearly dependent row into an independent one
/// (ascending index order; absorbing row is the smallest-index coefficient
/// with |lambda + 1| > 1e-9) until the rows are independent. The result has
/// numeric_row_rank(p_w_ex) categories.
ProxyMapping reduce_proxy(const Matrix& p_w_ex, double rel_tol = kRankTol);

/// Bins (-inf, c_1], (c_1, c_2], ..., (c_{m-1}, +inf), intersected with
/// the declared support [lower, upper].
struct Partition {
  std::vector<double> cuts;  // strictly increasing
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  std::size_t bins() const { return cuts.size() + 1; }
  /// Throws InvalidInput for non-increasing cuts or an empty support.
  void validate() const;
  /// 0-based bin; throws InvalidInput for a value outside the support.
  std::size_t bin_of(double value) const;
};

/// 1-based bin codes, as in the usual indicator-sum coding.
std::vector<std::size_t> discretize_proxy(std::span<const double> values, const Partition& partition);

/// One continuous proxy reading from a source domain.
struct ProxyObservation {
  double value;
  std::size_t x;
  std::size_t e;
  double weight = 1.0;
};

struct PartitionSearchResult {
  Partition partition;
  double min_singular_value;  // min over x of the smallest singular value
};

/// Searches quantile partitions with m in [k_U, m_max] bins (plus the
/// singleton partition when the proxy takes at most m_max distinct values)
/// for the one maximising min_x sigma_min(P(W~|E,x)), subject to
/// numeric_row_rank >= k_U for every x. Throws Error when none qualifies.
PartitionSearchResult search_partition(std::span<const ProxyObservation> observations, std::size_t k_X,
                                       std::size_t k_E, std::size_t k_U, std::size_t m_max,
                                       double rel_tol = kRankTol);

}  // namespace proxyshift
