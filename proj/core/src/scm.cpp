#include "proxyshift/scm.hpp"

#include "proxyshift/errors.hpp"

#include <string>

namespace proxyshift {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw InvalidInput(std::string(name) + " has shape " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  }
}

void expect_valid(const Matrix& m, bool strict, const char* name) {
  if (auto v = validate_stochastic(m, kStochasticTol, strict)) {
    throw InvalidInput(std::string(name) + ": " + v->describe());
  }
}

StochasticMatrix dirichlet_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(ix(rows), ix(cols));
  for (std::size_t c = 0; c < cols; ++c) m.col(ix(c)) = sample_flat_dirichlet(rows, rng);
  return StochasticMatrix(std::move(m));
}

std::vector<std::vector<double>> column_cdfs(const Matrix& m) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Idx c = 0; c < m.cols(); ++c) {
    std::vector<double> pmf(m.col(c).data(), m.col(c).data() + m.rows());
    out.push_back(cumulative(pmf));
  }
  return out;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// p(y | u, x) marginalising the proxy: sum_w p(y|u,w,x) p(w|u).
double outcome_given_ux(const ScmSpec& spec, std::size_t y, std::size_t u, std::size_t x) {
  double acc = 0.0;
  for (std::size_t w = 0; w < spec.dims.k_W; ++w) acc += spec.p_y(y, u, w, x) * spec.p_w_given_u(w, u);
  return acc;
}

void check_xy(const ScmSpec& spec, std::size_t x, std::size_t y) {
  if (x >= spec.dims.k_X) throw InvalidInput("x index " + std::to_string(x) + " out of range");
  if (y >= spec.dims.k_Y) throw InvalidInput("y index " + std::to_string(y) + " out of range");
}

}  // namespace

void ScmSpec::validate(bool require_full_support) const {
  dims.validate();
  const auto& d = dims;
  expect_shape(p_u_given_e.matrix(), d.k_U, d.k_E, "p_u_given_e");
  expect_shape(q_u.vector(), d.k_U, 1, "q_u");
  expect_shape(p_w_given_u.matrix(), d.k_W, d.k_U, "p_w_given_u");
  expect_shape(p_x_given_u.matrix(), d.k_X, d.k_U, "p_x_given_u");
  expect_shape(p_y_given_uwx.matrix(), d.k_Y, d.k_U * d.k_W * d.k_X, "p_y_given_uwx");
  expect_shape(domain_prior.vector(), d.k_E + 1, 1, "domain_prior");
  expect_valid(p_u_given_e.matrix(), require_full_support, "p_u_given_e");
  expect_valid(q_u.vector(), require_full_support, "q_u");
  expect_valid(p_w_given_u.matrix(), require_full_support, "p_w_given_u");
  expect_valid(p_x_given_u.matrix(), require_full_support, "p_x_given_u");
  expect_valid(p_y_given_uwx.matrix(), require_full_support, "p_y_given_uwx");
  expect_valid(domain_prior.vector(), require_full_support, "domain_prior");
}

void Dataset::validate() const {
  dims.validate();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    const std::string where = "record " + std::to_string(i) + ": ";
    if (r.w >= dims.k_W) throw InvalidInput(where + "w index out of range");
    if (r.is_target()) {
      if (r.x || r.y) throw InvalidInput(where + "target record carries x/y");
      continue;
    }
    if (r.domain >= dims.k_E) throw InvalidInput(where + "domain index out of range");
    if (!r.x || !r.y) throw InvalidInput(where + "source record is missing x or y");
    if (*r.x >= dims.k_X) throw InvalidInput(where + "x index out of range");
    if (*r.y >= dims.k_Y) throw InvalidInput(where + "y index out of range");
  }
}

ContingencyCounts ContingencyCounts::empty(const CategorySpec& dims) {
  ContingencyCounts c;
  c.dims = dims;
  c.n_yxwe.assign(dims.k_Y * dims.k_X * dims.k_W * dims.k_E, 0);
  c.n_w_target.assign(dims.k_W, 0);
  return c;
}

ContingencyCounts ContingencyCounts::from_dataset(const Dataset& ds) {
  ContingencyCounts c = empty(ds.dims);
  for (const Record& r : ds.records) {
    if (r.is_target()) {
      ++c.n_w_target[r.w];
      ++c.n_tgt;
    } else {
      ++c.n_yxwe[c.cell(*r.y, *r.x, r.w, r.domain)];
      ++c.n_src;
    }
  }
  c.n = c.n_src + c.n_tgt;
  return c;
}

ScmSpec sample_scm_spec(const CategorySpec& dims, Rng& rng) {
  dims.validate();
  ScmSpec spec;
  spec.dims = dims;
  spec.p_u_given_e = dirichlet_columns(dims.k_U, dims.k_E, rng);
  spec.q_u = ProbVector(sample_flat_dirichlet(dims.k_U, rng));
  spec.p_w_given_u = dirichlet_columns(dims.k_W, dims.k_U, rng);
  spec.p_x_given_u = dirichlet_columns(dims.k_X, dims.k_U, rng);
  spec.p_y_given_uwx = dirichlet_columns(dims.k_Y, dims.k_U * dims.k_W * dims.k_X, rng);
  spec.domain_prior = ProbVector::uniform(dims.k_E + 1);
  return spec;
}

SimulatedSample simulate_with_hidden(const ScmSpec& spec, std::size_t n, Rng& rng) {
  const auto& d = spec.dims;
  const auto prior_cdf = cumulative(to_std(spec.domain_prior.vector()));
  const auto u_cdf = column_cdfs(spec.p_u_given_e.matrix());
  const auto qu_cdf = cumulative(to_std(spec.q_u.vector()));
  const auto w_cdf = column_cdfs(spec.p_w_given_u.matrix());
  const auto x_cdf = column_cdfs(spec.p_x_given_u.matrix());
  const auto y_cdf = column_cdfs(spec.p_y_given_uwx.matrix());

  SimulatedSample out;
  out.observed.dims = d;
  out.hidden.dims = d;
  out.observed.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t e = sample_from_cdf(prior_cdf, rng);
    const bool target = e == d.k_E;
    const std::size_t u = sample_from_cdf(target ? qu_cdf : u_cdf[e], rng);
    const std::size_t w = sample_from_cdf(w_cdf[u], rng);
    const std::size_t x = sample_from_cdf(x_cdf[u], rng);
    const std::size_t y = sample_from_cdf(y_cdf[spec.yx_column(u, w, x)], rng);
    if (target) {
      out.observed.records.push_back(Record{kTargetDomain, w, std::nullopt, std::nullopt});
      out.hidden.units.push_back({w, x, y});
    } else {
      out.observed.records.push_back(Record{e, w, x, y});
    }
  }
  return out;
}

Dataset simulate_dataset(const ScmSpec& spec, std::size_t n, Rng& rng) {
  return simulate_with_hidden(spec, n, rng).observed;
}

double true_effect(const ScmSpec& spec, std::size_t x, std::size_t y) {
  check_xy(spec, x, y);
  double acc = 0.0;
  for (std::size_t u = 0; u < spec.dims.k_U; ++u) acc += outcome_given_ux(spec, y, u, x) * spec.q_u[u];
  return acc;
}

double target_conditional(const ScmSpec& spec, std::size_t x, std::size_t y) {
  check_xy(spec, x, y);
  double num = 0.0, den = 0.0;
  for (std::size_t u = 0; u < spec.dims.k_U; ++u) {
    const double joint = spec.q_u[u] * spec.p_x_given_u(x, u);
    num += joint * outcome_given_ux(spec, y, u, x);
    den += joint;
  }
  return num / den;
}

PopulationViews population_views(const ScmSpec& spec, std::size_t x, std::size_t y) {
  check_xy(spec, x, y);
  const auto& d = spec.dims;
  PopulationViews v;

  // p(u | e, x) proportional to p(x | u) p(u | e).
  v.p_u_ex.resize(ix(d.k_U), ix(d.k_E));
  for (std::size_t e = 0; e < d.k_E; ++e) {
    double norm = 0.0;
    for (std::size_t u = 0; u < d.k_U; ++u) {
      const double val = spec.p_x_given_u(x, u) * spec.p_u_given_e(u, e);
      v.p_u_ex(ix(u), ix(e)) = val;
      norm += val;
    }
    v.p_u_ex.col(ix(e)) /= norm;
  }

  v.p_w_ex = spec.p_w_given_u.matrix() * v.p_u_ex;
  v.q_w = spec.p_w_given_u.matrix() * spec.q_u.vector();

  v.p_y_ex.resize(ix(d.k_E));
  for (std::size_t e = 0; e < d.k_E; ++e) {
    double acc = 0.0;
    for (std::size_t u = 0; u < d.k_U; ++u) acc += outcome_given_ux(spec, y, u, x) * v.p_u_ex(ix(u), ix(e));
    v.p_y_ex(ix(e)) = acc;
  }

  const ContingencyCounts layout = ContingencyCounts::empty(d);
  v.p_yxw_given_e.assign(layout.n_yxwe.size(), 0.0);
  for (std::size_t e = 0; e < d.k_E; ++e)
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t xs = 0; xs < d.k_X; ++xs)
        for (std::size_t ys = 0; ys < d.k_Y; ++ys) {
          double acc = 0.0;
          for (std::size_t u = 0; u < d.k_U; ++u) {
            acc += spec.p_y(ys, u, w, xs) * spec.p_w_given_u(w, u) * spec.p_x_given_u(xs, u) *
                   spec.p_u_given_e(u, e);
          }
          v.p_yxw_given_e[layout.cell(ys, xs, w, e)] = acc;
        }
  return v;
}

std::vector<std::size_t> interventional_sample(const ScmSpec& spec, std::size_t x, std::size_t n, Rng& rng) {
  if (x >= spec.dims.k_X) throw InvalidInput("x index " + std::to_string(x) + " out of range");
  const auto qu_cdf = cumulative(to_std(spec.q_u.vector()));
  const auto w_cdf = column_cdfs(spec.p_w_given_u.matrix());
  const auto y_cdf = column_cdfs(spec.p_y_given_uwx.matrix());
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t u = sample_from_cdf(qu_cdf, rng);
    const std::size_t w = sample_from_cdf(w_cdf[u], rng);
    out.push_back(sample_from_cdf(y_cdf[spec.yx_column(u, w, x)], rng));
  }
  return out;
}

}  // namespace proxyshift
