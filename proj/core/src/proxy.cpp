#include "proxyshift/proxy.hpp"

#include "proxyshift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace proxyshift {

namespace {

using Idx = Eigen::Index;

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Idx>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Idx>(i)) = m.row(static_cast<Idx>(rows[i]));
  return out;
}

constexpr double kLambdaGuard = 1e-9;

}  // namespace

ProxyMapping ProxyMapping::identity(std::size_t k) {
  ProxyMapping m;
  m.source_cardinality = k;
  m.target_cardinality = k;
  m.assignment.resize(k);
  std::iota(m.assignment.begin(), m.assignment.end(), std::size_t{0});
  return m;
}

Matrix ProxyMapping::apply_rows(const Matrix& m) const {
  if (static_cast<std::size_t>(m.rows()) != source_cardinality) {
    throw InvalidInput("proxy mapping expects " + std::to_string(source_cardinality) + " rows, got " +
                       std::to_string(m.rows()));
  }
  Matrix out = Matrix::Zero(static_cast<Idx>(target_cardinality), m.cols());
  for (std::size_t j = 0; j < source_cardinality; ++j) out.row(static_cast<Idx>(assignment[j])) += m.row(static_cast<Idx>(j));
  return out;
}

Vector ProxyMapping::apply(const Vector& v) const {
  Matrix as_col = v;
  return apply_rows(as_col).col(0);
}

Dataset ProxyMapping::apply(const Dataset& ds) const {
  if (ds.dims.k_W != source_cardinality) {
    throw InvalidInput("proxy mapping expects k_W = " + std::to_string(source_cardinality));
  }
  Dataset out = ds;
  out.dims.k_W = target_cardinality;
  out.dims.labels_W.clear();
  for (Record& r : out.records) r.w = assignment[r.w];
  return out;
}

std::vector<std::size_t> ProxyMapping::replay() const {
  std::vector<std::size_t> rep(source_cardinality);
  std::iota(rep.begin(), rep.end(), std::size_t{0});
  for (const Merge& mg : merges) {
    for (auto& r : rep) {
      if (r == mg.absorbed) r = mg.into;
    }
  }
  std::vector<std::size_t> reps = rep;
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  std::vector<std::size_t> out(source_cardinality);
  for (std::size_t j = 0; j < source_cardinality; ++j) {
    out[j] = static_cast<std::size_t>(std::lower_bound(reps.begin(), reps.end(), rep[j]) - reps.begin());
  }
  return out;
}

ProxyMapping reduce_proxy(const Matrix& p_w_ex, double rel_tol) {
  if (p_w_ex.size() == 0) throw InvalidInput("reduce_proxy on an empty matrix");
  const auto k = static_cast<std::size_t>(p_w_ex.rows());
  ProxyMapping mapping = ProxyMapping::identity(k);

  Matrix current = p_w_ex;
  // Original index of each surviving row's representative (its own index).
  std::vector<std::size_t> reps(k);
  std::iota(reps.begin(), reps.end(), std::size_t{0});

  while (numeric_row_rank(current, rel_tol) < static_cast<std::size_t>(current.rows())) {
    std::vector<std::size_t> basis;
    std::size_t dependent = 0;
    bool found = false;
    for (std::size_t i = 0; i < static_cast<std::size_t>(current.rows()); ++i) {
      std::vector<std::size_t> trial = basis;
      trial.push_back(i);
      if (numeric_row_rank(select_rows(current, trial), rel_tol) == trial.size()) {
        basis.push_back(i);
      } else {
        dependent = i;
        found = true;
        break;
      }
    }
    if (!found) break;  // unreachable while the rank test above disagrees

    std::size_t absorber = 0;
    double coefficient = 0.0;
    if (basis.empty()) {
      // Leading zero row: no dependency relation, absorb into the next row.
      absorber = dependent + 1;
    } else {
      const Matrix b = select_rows(current, basis);
      const Vector v = current.row(static_cast<Idx>(dependent)).transpose();
      const Vector lambda = b.transpose().colPivHouseholderQr().solve(v);
      bool chosen = false;
      for (std::size_t j = 0; j < basis.size(); ++j) {
        if (std::abs(lambda(static_cast<Idx>(j)) + 1.0) > kLambdaGuard) {
          absorber = basis[j];
          coefficient = lambda(static_cast<Idx>(j));
          chosen = true;
          break;
        }
      }
      if (!chosen) throw Error("reduce_proxy: every coefficient equals -1; matrix is not non-negative");
    }

    current.row(static_cast<Idx>(absorber)) += current.row(static_cast<Idx>(dependent));
    mapping.merges.push_back({reps[dependent], reps[absorber], coefficient});

    Matrix next(current.rows() - 1, current.cols());
    std::vector<std::size_t> next_reps;
    for (Idx r = 0, o = 0; r < current.rows(); ++r) {
      if (static_cast<std::size_t>(r) == dependent) continue;
      next.row(o++) = current.row(r);
      next_reps.push_back(reps[static_cast<std::size_t>(r)]);
    }
    current = std::move(next);
    reps = std::move(next_reps);
  }

  mapping.target_cardinality = static_cast<std::size_t>(current.rows());
  mapping.assignment = mapping.replay();
  return mapping;
}

void Partition::validate() const {
  if (!(lower <= upper)) throw InvalidInput("partition support is empty");
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i])) throw InvalidInput("partition cut is not finite");
    if (i > 0 && !(cuts[i] > cuts[i - 1])) throw InvalidInput("partition cuts must be strictly increasing");
  }
}

std::size_t Partition::bin_of(double value) const {
  if (std::isnan(value) || value < lower || value > upper) {
    std::ostringstream os;
    os.precision(17);
    os << "value " << value << " lies outside the partition support [" << lower << ", " << upper << "]";
    throw InvalidInput(os.str());
  }
  // Right-closed bins: the first cut >= value closes the bin.
  return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

std::vector<std::size_t> discretize_proxy(std::span<const double> values, const Partition& partition) {
  partition.validate();
  std::vector<std::size_t> codes;
  codes.reserve(values.size());
  for (double v : values) codes.push_back(partition.bin_of(v) + 1);
  return codes;
}

namespace {

// Weighted P(W~ | E, x) per x; nullopt when some (x, e) column has no mass.
std::optional<std::vector<Matrix>> binned_matrices(std::span<const ProxyObservation> obs, const Partition& p,
                                                   std::size_t k_X, std::size_t k_E) {
  std::vector<Matrix> mats(k_X, Matrix::Zero(static_cast<Idx>(p.bins()), static_cast<Idx>(k_E)));
  for (const auto& o : obs) {
    mats[o.x](static_cast<Idx>(p.bin_of(o.value)), static_cast<Idx>(o.e)) += o.weight;
  }
  for (auto& m : mats) {
    for (Idx c = 0; c < m.cols(); ++c) {
      const double s = m.col(c).sum();
      if (!(s > 0.0)) return std::nullopt;
      m.col(c) /= s;
    }
  }
  return mats;
}

}  // namespace

PartitionSearchResult search_partition(std::span<const ProxyObservation> observations, std::size_t k_X,
                                       std::size_t k_E, std::size_t k_U, std::size_t m_max, double rel_tol) {
  if (m_max < k_U) throw InvalidInput("m_max must be >= k_U");
  if (observations.empty()) throw InvalidInput("search_partition needs observations");
  for (const auto& o : observations) {
    if (o.x >= k_X || o.e >= k_E) throw InvalidInput("proxy observation index out of range");
    if (!std::isfinite(o.value)) throw InvalidInput("proxy observation is not finite");
    if (!(o.weight >= 0.0)) throw InvalidInput("proxy observation weight must be non-negative");
  }

  // Pooled weighted values, ascending.
  std::map<double, double> pooled;
  double total = 0.0;
  for (const auto& o : observations) {
    pooled[o.value] += o.weight;
    total += o.weight;
  }

  auto evaluate = [&](const Partition& p) -> std::optional<double> {
    auto mats = binned_matrices(observations, p, k_X, k_E);
    if (!mats) return std::nullopt;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : *mats) {
      if (numeric_row_rank(m, rel_tol) < k_U) return std::nullopt;
      const Vector s = singular_values(m);
      worst = std::min(worst, s(s.size() - 1));
    }
    return worst;
  };

  if (pooled.size() <= m_max && pooled.size() >= k_U) {
    Partition singleton;
    for (auto it = pooled.begin(); std::next(it) != pooled.end(); ++it) singleton.cuts.push_back(it->first);
    if (auto score = evaluate(singleton)) return {singleton, *score};
  }

  std::optional<PartitionSearchResult> best;
  for (std::size_t m = k_U; m <= m_max; ++m) {
    Partition p;
    double acc = 0.0;
    std::size_t j = 1;
    for (auto it = pooled.begin(); it != pooled.end() && j < m; ++it) {
      acc += it->second;
      while (j < m && acc >= total * static_cast<double>(j) / static_cast<double>(m)) {
        if (p.cuts.empty() || it->first > p.cuts.back()) p.cuts.push_back(it->first);
        ++j;
      }
    }
    // Ties collapse cuts; skip candidates that lost bins or end at the maximum.
    if (p.cuts.size() != m - 1) continue;
    if (!p.cuts.empty() && p.cuts.back() >= pooled.rbegin()->first) continue;
    if (auto score = evaluate(p)) {
      if (!best || *score > best->min_singular_value) best = PartitionSearchResult{p, *score};
    }
  }
  if (!best) {
    throw Error("no partition with at most " + std::to_string(m_max) + " bins reaches rank " +
                std::to_string(k_U) + " for every x");
  }
  return *best;
}

}  // namespace proxyshift
