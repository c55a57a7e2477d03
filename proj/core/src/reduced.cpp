#include "proxyshift/reduced.hpp"

#include "proxyshift/errors.hpp"
#include "proxyshift/identify.hpp"
#include "proxyshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace proxyshift {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

// Adds c * iota iota^T and c * iota for a sparse 0/1 indicator vector.
void accumulate(const std::vector<std::size_t>& ones, double c, Vector& sum, Matrix& outer) {
  for (std::size_t a : ones) {
    sum(ix(a)) += c;
    for (std::size_t b : ones) outer(ix(a), ix(b)) += c;
  }
}

void check_xy(const CategorySpec& dims, std::size_t x, std::size_t y) {
  if (x >= dims.k_X) throw InvalidInput("x index " + std::to_string(x) + " out of range");
  if (y >= dims.k_Y) throw InvalidInput("y index " + std::to_string(y) + " out of range");
}

}  // namespace

EtaVector eta_from_counts(const ContingencyCounts& counts, std::size_t x, std::size_t y) {
  const auto& d = counts.dims;
  check_xy(d, x, y);
  EtaVector eta;
  eta.layout = EtaLayout{d.k_W, d.k_E};
  eta.n = counts.n;
  const std::size_t k = eta.layout.size();
  Vector sum = Vector::Zero(ix(k));
  Matrix outer = Matrix::Zero(ix(k), ix(k));
  const EtaLayout& L = eta.layout;

  std::vector<std::size_t> ones;
  for (std::size_t j = 0; j < d.k_W; ++j) {
    const auto c = counts.n_w_target[j];
    if (c == 0) continue;
    ones.clear();
    if (j + 1 < d.k_W) ones.push_back(L.q_w(j));
    ones.push_back(L.q_target());
    accumulate(ones, static_cast<double>(c), sum, outer);
  }
  for (std::size_t e = 0; e < d.k_E; ++e)
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t ys = 0; ys < d.k_Y; ++ys) {
        const auto c = counts.at(ys, x, w, e);
        if (c == 0) continue;
        ones.clear();
        if (w + 1 < d.k_W) ones.push_back(L.p_wx(w, e));
        if (ys == y) ones.push_back(L.p_yx(e));
        ones.push_back(L.p_x(e));
        accumulate(ones, static_cast<double>(c), sum, outer);
      }

  if (counts.n == 0) {
    eta.values = sum;
    eta.covariance = outer;
    return eta;
  }
  const double n = static_cast<double>(counts.n);
  eta.values = sum / n;
  if (counts.n > 1) {
    eta.covariance = (outer / n - eta.values * eta.values.transpose()) * (n / (n - 1.0));
  } else {
    eta.covariance = Matrix::Zero(ix(k), ix(k));
  }
  return eta;
}

EtaVector eta_from_dataset(const Dataset& ds, std::size_t x, std::size_t y) {
  if (ds.records.empty()) throw InvalidInput("eta_from_dataset on an empty dataset");
  return eta_from_counts(ContingencyCounts::from_dataset(ds), x, y);
}

EtaMatrices matrices_from_eta(const EtaLayout& L, const Vector& eta) {
  if (static_cast<std::size_t>(eta.size()) != L.size()) {
    throw InvalidInput("eta has length " + std::to_string(eta.size()) + ", expected " + std::to_string(L.size()));
  }
  EtaMatrices m;
  const double q_target = eta(ix(L.q_target()));
  if (!(q_target > 0.0)) throw EmptyCellError("no records in the target domain");
  m.q_w.resize(ix(L.k_W));
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < L.k_W; ++j) {
    m.q_w(ix(j)) = eta(ix(L.q_w(j))) / q_target;
    acc += m.q_w(ix(j));
  }
  m.q_w(ix(L.k_W - 1)) = 1.0 - acc;

  m.p_w_ex.resize(ix(L.k_W), ix(L.k_E));
  m.p_y_ex.resize(ix(L.k_E));
  for (std::size_t l = 0; l < L.k_E; ++l) {
    const double px = eta(ix(L.p_x(l)));
    if (!(px > 0.0)) {
      throw EmptyCellError("no source record with the requested x in domain " + std::to_string(l + 1));
    }
    double col = 0.0;
    for (std::size_t j = 0; j + 1 < L.k_W; ++j) {
      m.p_w_ex(ix(j), ix(l)) = eta(ix(L.p_wx(j, l))) / px;
      col += m.p_w_ex(ix(j), ix(l));
    }
    m.p_w_ex(ix(L.k_W - 1), ix(l)) = 1.0 - col;
    m.p_y_ex(ix(l)) = eta(ix(L.p_yx(l))) / px;
  }
  return m;
}

double h_of_eta(const EtaLayout& layout, const Vector& eta, double rank_tol) {
  const EtaMatrices m = matrices_from_eta(layout, eta);
  return identify_effect(m.p_y_ex, m.p_w_ex, m.q_w, IdentifyOptions{rank_tol, std::nullopt});
}

Vector grad_h(const EtaLayout& layout, const Vector& eta, double rank_tol, double step_scale) {
  Vector g(eta.size());
  Vector probe = eta;
  for (Idx i = 0; i < eta.size(); ++i) {
    const double step = step_scale * std::max(1e-6, 1e-6 * std::abs(eta(i)));
    probe(i) = eta(i) + step;
    const double up = h_of_eta(layout, probe, rank_tol);
    probe(i) = eta(i) - step;
    const double down = h_of_eta(layout, probe, rank_tol);
    probe(i) = eta(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

EffectEstimate reduced_estimate(const ContingencyCounts& counts, std::size_t x, std::size_t y,
                                const ReducedOptions& opts) {
  if (counts.n == 0) throw InvalidInput("reduced estimator needs at least one record");
  EtaVector eta = eta_from_counts(counts, x, y);
  const EtaLayout& L = eta.layout;

  const EtaMatrices m = matrices_from_eta(L, eta.values);
  const double kappa = condition_number(m.p_w_ex);
  Vector used = eta.values;
  bool perturbed = false;
  if (m.p_w_ex.rows() > m.p_w_ex.cols() ||
      numeric_row_rank(m.p_w_ex, opts.rank_tol) < static_cast<std::size_t>(m.p_w_ex.rows())) {
    for (std::size_t l = 0; l < L.k_E; ++l)
      for (std::size_t j = 0; j + 1 < L.k_W; ++j) used(ix(L.p_wx(j, l))) += kRankPerturbation;
    perturbed = true;
  }

  const double point = h_of_eta(L, used, opts.rank_tol);
  std::optional<double> half_width;
  std::optional<double> sigma;
  if (opts.with_ci) {
    const Vector g = grad_h(L, used, opts.rank_tol);
    const double var = g.dot(eta.covariance * g);
    sigma = std::sqrt(std::max(var, 0.0));
    const double z = stats::normal_quantile(1.0 - opts.alpha / 2.0);
    half_width = z * *sigma / std::sqrt(static_cast<double>(counts.n));
  }
  EffectEstimate est = clipped_estimate(point, half_width, opts.alpha);
  est.sigma_hat = sigma;
  est.n = counts.n;
  est.kappa_hat = kappa;
  est.flags.rank_perturbed = perturbed;
  return est;
}

EffectEstimate reduced_estimate(const Dataset& ds, std::size_t x, std::size_t y, const ReducedOptions& opts) {
  return reduced_estimate(ContingencyCounts::from_dataset(ds), x, y, opts);
}

BootstrapInterval bootstrap_ci(const ContingencyCounts& counts, std::size_t x, std::size_t y, std::size_t B,
                               double alpha, Rng& rng, double rank_tol) {
  if (B < 2) throw InvalidInput("bootstrap needs B >= 2");
  const ReducedOptions point_only{alpha, rank_tol, false};
  const double full = reduced_estimate(counts, x, y, point_only).point_unclipped;

  // Resampling n units with replacement is a multinomial draw over cells:
  // source cells first, then target proxy cells.
  const std::size_t n_src_cells = counts.n_yxwe.size();
  std::vector<double> probs;
  probs.reserve(n_src_cells + counts.n_w_target.size());
  const double n = static_cast<double>(counts.n);
  for (auto c : counts.n_yxwe) probs.push_back(static_cast<double>(c) / n);
  for (auto c : counts.n_w_target) probs.push_back(static_cast<double>(c) / n);

  const std::uint64_t base = rng();
  std::vector<double> estimates;
  estimates.reserve(B);
  std::size_t failed = 0;
  for (std::size_t b = 0; b < B; ++b) {
    Rng stream(derive_seed(base, b));
    const auto draw = sample_multinomial(counts.n, probs, stream);
    ContingencyCounts re = ContingencyCounts::empty(counts.dims);
    for (std::size_t i = 0; i < n_src_cells; ++i) {
      re.n_yxwe[i] = draw[i];
      re.n_src += draw[i];
    }
    for (std::size_t j = 0; j < counts.n_w_target.size(); ++j) {
      re.n_w_target[j] = draw[n_src_cells + j];
      re.n_tgt += draw[n_src_cells + j];
    }
    re.n = re.n_src + re.n_tgt;
    try {
      estimates.push_back(reduced_estimate(re, x, y, point_only).point_unclipped);
    } catch (const Error&) {
      ++failed;
    }
  }
  if (static_cast<double>(failed) > 0.1 * static_cast<double>(B)) {
    throw Error("bootstrap aborted: " + std::to_string(failed) + " of " + std::to_string(B) +
                " resamples could not be estimated");
  }

  BootstrapInterval out;
  out.failed_resamples = failed;
  out.point_unclipped = full;
  out.sigma_boot = stats::stddev(estimates);
  const double half = stats::normal_quantile(1.0 - alpha / 2.0) * out.sigma_boot;
  out.lower_unclipped = full - half;
  out.upper_unclipped = full + half;
  out.lower = std::clamp(out.lower_unclipped, 0.0, 1.0);
  out.upper = std::clamp(out.upper_unclipped, 0.0, 1.0);
  return out;
}

BootstrapInterval bootstrap_ci(const Dataset& ds, std::size_t x, std::size_t y, std::size_t B, double alpha,
                               Rng& rng, double rank_tol) {
  return bootstrap_ci(ContingencyCounts::from_dataset(ds), x, y, B, alpha, rng, rank_tol);
}

}  // namespace proxyshift
