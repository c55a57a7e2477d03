#pragma once

// The discrete latent-shift structural causal model
//
//   E -> U -> {W, X},   (U, W, X) -> Y,
//
// with source domains e_1..e_{k_E} and an unseen target domain e_T where only
// W is observed. Provides model sampling, forward simulation of datasets,
// exact population quantities and the ground-truth interventional pmf.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "proxyshift/linalg.hpp"
#include "proxyshift/rng.hpp"

namespace proxyshift {

/// Full generative model. All conditionals are column-stochastic.
struct ScmSpec {
  CategorySpec dims;
  StochasticMatrix p_u_given_e;  // k_U x k_E
  ProbVector q_u;                // k_U, target-domain confounder law
  StochasticMatrix p_w_given_u;  // k_W x k_U
  StochasticMatrix p_x_given_u;  // k_X x k_U
  // k_Y x (k_U * k_W * k_X); column index given by yx_column().
  StochasticMatrix p_y_given_uwx;
  ProbVector domain_prior;  // k_E + 1 entries, target last

  std::size_t yx_column(std::size_t u, std::size_t w, std::size_t x) const {
    return u + dims.k_U * (w + dims.k_W * x);
  }
  double p_y(std::size_t y, std::size_t u, std::size_t w, std::size_t x) const {
    return p_y_given_uwx(y, yx_column(u, w, x));
  }

  /// Throws InvalidInput on any dimension mismatch, and on zero entries when
  /// require_full_support is set.
  void validate(bool require_full_support = true) const;
};

/// Builds p_y_given_uwx from a callback f(y, u, w, x).
template <class F>
StochasticMatrix make_outcome_tensor(const CategorySpec& dims, F&& f) {
  Matrix m(static_cast<Eigen::Index>(dims.k_Y), static_cast<Eigen::Index>(dims.k_U * dims.k_W * dims.k_X));
  for (std::size_t x = 0; x < dims.k_X; ++x)
    for (std::size_t w = 0; w < dims.k_W; ++w)
      for (std::size_t u = 0; u < dims.k_U; ++u)
        for (std::size_t y = 0; y < dims.k_Y; ++y)
          m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(u + dims.k_U * (w + dims.k_W * x))) =
              f(y, u, w, x);
  return StochasticMatrix(std::move(m));
}

inline constexpr std::size_t kTargetDomain = std::numeric_limits<std::size_t>::max();

/// One unit. x and y are present iff the unit comes from a source domain.
struct Record {
  std::size_t domain = 0;  // 0..k_E-1, or kTargetDomain
  std::size_t w = 0;
  std::optional<std::size_t> x;
  std::optional<std::size_t> y;

  bool is_target() const { return domain == kTargetDomain; }
  friend bool operator==(const Record&, const Record&) = default;
};

struct Dataset {
  CategorySpec dims;
  std::vector<Record> records;

  /// Throws InvalidInput naming the first bad record.
  void validate() const;
  std::size_t size() const { return records.size(); }
};

/// (w, x, y) of target units. Never observable in practice; the simulator
/// emits it for benchmark-only baselines.
struct TargetOutcomes {
  struct Unit {
    std::size_t w, x, y;
  };
  CategorySpec dims;
  std::vector<Unit> units;
};

struct SimulatedSample {
  Dataset observed;
  TargetOutcomes hidden;
};

/// Sufficient statistics of a Dataset.
struct ContingencyCounts {
  CategorySpec dims;
  std::vector<std::uint64_t> n_yxwe;     // index via cell()
  std::vector<std::uint64_t> n_w_target;  // k_W
  std::uint64_t n = 0, n_src = 0, n_tgt = 0;

  static ContingencyCounts from_dataset(const Dataset& ds);
  static ContingencyCounts empty(const CategorySpec& dims);

  std::size_t cell(std::size_t y, std::size_t x, std::size_t w, std::size_t e) const {
    return y + dims.k_Y * (x + dims.k_X * (w + dims.k_W * e));
  }
  std::uint64_t at(std::size_t y, std::size_t x, std::size_t w, std::size_t e) const {
    return n_yxwe[cell(y, x, w, e)];
  }
};

/// Exact population matrices entering the identification formula for (x, y).
struct PopulationViews {
  RowVector p_y_ex;  // p(y | e_l, x), length k_E
  Matrix p_w_ex;     // p(w_j | e_l, x), k_W x k_E
  Matrix p_u_ex;     // p(u | e_l, x), k_U x k_E
  Vector q_w;        // q(w_j)
  // p(y', x', w | e) for every cell, same layout as ContingencyCounts::cell().
  std::vector<double> p_yxw_given_e;
};

/// Flat-Dirichlet draw of every conditional column; uniform domain prior
/// over the k_E sources and the target.
ScmSpec sample_scm_spec(const CategorySpec& dims, Rng& rng);

/// n i.i.d. units in ancestral order; U is drawn and discarded.
Dataset simulate_dataset(const ScmSpec& spec, std::size_t n, Rng& rng);

/// As simulate_dataset, also returning the target units' hidden (x, y).
/// Consumes the stream identically, so `observed` matches simulate_dataset.
SimulatedSample simulate_with_hidden(const ScmSpec& spec, std::size_t n, Rng& rng);

/// q(y | do(x)) = sum_u [sum_w p(y|u,w,x) p(w|u)] q(u).
double true_effect(const ScmSpec& spec, std::size_t x, std::size_t y);

/// Target-domain observational conditional q(y | x).
double target_conditional(const ScmSpec& spec, std::size_t x, std::size_t y);

PopulationViews population_views(const ScmSpec& spec, std::size_t x, std::size_t y);

/// Y draws with U ~ Q(U), W ~ P(W|U), X forced to x.
std::vector<std::size_t> interventional_sample(const ScmSpec& spec, std::size_t x, std::size_t n, Rng& rng);

}  // namespace proxyshift
