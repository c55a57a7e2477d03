#include "proxyshift/causal.hpp"

#include "proxyshift/errors.hpp"
#include "proxyshift/reduced.hpp"
#include "proxyshift/rng.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace proxyshift {

namespace {

using Idx = Eigen::Index;

Idx ix(std::size_t i) { return static_cast<Idx>(i); }

// Softmax of `rows` consecutive logits per column, for `cols` columns.
Matrix softmax_block(const Vector& logits, std::size_t offset, std::size_t rows, std::size_t cols) {
  Matrix out(ix(rows), ix(cols));
  for (std::size_t c = 0; c < cols; ++c) {
    const auto seg = logits.segment(ix(offset + c * rows), ix(rows));
    const double mx = seg.maxCoeff();
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = std::exp(seg(ix(r)) - mx);
      out(ix(r), ix(c)) = v;
      total += v;
    }
    out.col(ix(c)) /= total;
  }
  return out;
}

// Chain rule through a softmax column block: dz = p (g - p.g).
void softmax_backward(const Matrix& probs, const Matrix& grad_probs, std::size_t offset, Vector& grad) {
  const auto rows = static_cast<std::size_t>(probs.rows());
  for (Idx c = 0; c < probs.cols(); ++c) {
    const double inner = probs.col(c).dot(grad_probs.col(c));
    for (Idx r = 0; r < probs.rows(); ++r) {
      grad(ix(offset + static_cast<std::size_t>(c) * rows) + r) = probs(r, c) * (grad_probs(r, c) - inner);
    }
  }
}

void write_log_block(const Matrix& probs, std::size_t offset, Vector& logits) {
  const auto rows = static_cast<std::size_t>(probs.rows());
  for (Idx c = 0; c < probs.cols(); ++c)
    for (Idx r = 0; r < probs.rows(); ++r)
      logits(ix(offset + static_cast<std::size_t>(c) * rows) + r) = std::log(probs(r, c));
}

CategorySpec fit_dims(const CategorySpec& data_dims, const FitOptions& opts) {
  CategorySpec d = data_dims;
  if (opts.k_U) {
    if (*opts.k_U < 1) throw InvalidInput("fit k_U must be >= 1");
    d.k_U = *opts.k_U;
    d.labels_U.clear();
  }
  return d;
}

double likelihood_impl(const ThetaProbabilities& p, const ContingencyCounts& counts, Vector* grad,
                       const ThetaLayout* layout) {
  const auto& d = p.dims;
  const auto& cd = counts.dims;
  if (cd.k_E != d.k_E || cd.k_W != d.k_W || cd.k_X != d.k_X || cd.k_Y != d.k_Y) {
    throw InvalidInput("counts and parameters disagree on dimensions");
  }
  Matrix gD, gB, gC, gA;
  Vector gQ;
  if (grad) {
    gD = Matrix::Zero(p.p_u_given_e.rows(), p.p_u_given_e.cols());
    gQ = Vector::Zero(p.q_u.size());
    gB = Matrix::Zero(p.p_w_given_u.rows(), p.p_w_given_u.cols());
    gC = Matrix::Zero(p.p_x_given_u.rows(), p.p_x_given_u.cols());
    gA = Matrix::Zero(p.p_y_given_uwx.rows(), p.p_y_given_uwx.cols());
  }

  double ll = 0.0;
  for (std::size_t e = 0; e < d.k_E; ++e)
    for (std::size_t w = 0; w < d.k_W; ++w)
      for (std::size_t x = 0; x < d.k_X; ++x)
        for (std::size_t y = 0; y < d.k_Y; ++y) {
          const auto n = counts.at(y, x, w, e);
          if (n == 0) continue;
          double cell = 0.0;
          for (std::size_t u = 0; u < d.k_U; ++u) {
            cell += p.p_y(y, u, w, x) * p.p_w_given_u(ix(w), ix(u)) * p.p_x_given_u(ix(x), ix(u)) *
                    p.p_u_given_e(ix(u), ix(e));
          }
          const double nn = static_cast<double>(n);
          ll += nn * std::log(cell);
          if (!grad) continue;
          const double r = nn / cell;
          for (std::size_t u = 0; u < d.k_U; ++u) {
            const double a = p.p_y(y, u, w, x);
            const double b = p.p_w_given_u(ix(w), ix(u));
            const double c = p.p_x_given_u(ix(x), ix(u));
            const double dd = p.p_u_given_e(ix(u), ix(e));
            gA(ix(y), ix(u + d.k_U * (w + d.k_W * x))) += r * b * c * dd;
            gB(ix(w), ix(u)) += r * a * c * dd;
            gC(ix(x), ix(u)) += r * a * b * dd;
            gD(ix(u), ix(e)) += r * a * b * c;
          }
        }
  for (std::size_t w = 0; w < d.k_W; ++w) {
    const auto n = counts.n_w_target[w];
    if (n == 0) continue;
    double qw = 0.0;
    for (std::size_t u = 0; u < d.k_U; ++u) qw += p.p_w_given_u(ix(w), ix(u)) * p.q_u(ix(u));
    const double nn = static_cast<double>(n);
    ll += nn * std::log(qw);
    if (!grad) continue;
    const double r = nn / qw;
    for (std::size_t u = 0; u < d.k_U; ++u) {
      gB(ix(w), ix(u)) += r * p.q_u(ix(u));
      gQ(ix(u)) += r * p.p_w_given_u(ix(w), ix(u));
    }
  }

  if (grad) {
    grad->resize(ix(layout->size()));
    softmax_backward(p.p_u_given_e, gD, layout->u_given_e(), *grad);
    softmax_backward(p.q_u, gQ, layout->q_u(), *grad);
    softmax_backward(p.p_w_given_u, gB, layout->w_given_u(), *grad);
    softmax_backward(p.p_x_given_u, gC, layout->x_given_u(), *grad);
    softmax_backward(p.p_y_given_uwx, gA, layout->y_given_uwx(), *grad);
  }
  return ll;
}

}  // namespace

ScmSpec ThetaProbabilities::to_spec() const {
  ScmSpec s;
  s.dims = dims;
  s.p_u_given_e = StochasticMatrix(p_u_given_e);
  s.q_u = ProbVector(q_u);
  s.p_w_given_u = StochasticMatrix(p_w_given_u);
  s.p_x_given_u = StochasticMatrix(p_x_given_u);
  s.p_y_given_uwx = StochasticMatrix(p_y_given_uwx);
  s.domain_prior = ProbVector::uniform(dims.k_E + 1);
  return s;
}

ThetaProbabilities logits_to_theta(const ThetaParams& theta) {
  const ThetaLayout& L = theta.layout;
  const auto& d = L.dims;
  if (static_cast<std::size_t>(theta.logits.size()) != L.size()) {
    throw InvalidInput("theta has " + std::to_string(theta.logits.size()) + " logits, expected " +
                       std::to_string(L.size()));
  }
  if (!theta.logits.allFinite()) throw InvalidInput("non-finite logit in theta");
  ThetaProbabilities p;
  p.dims = d;
  p.p_u_given_e = softmax_block(theta.logits, L.u_given_e(), d.k_U, d.k_E);
  p.q_u = softmax_block(theta.logits, L.q_u(), d.k_U, 1).col(0);
  p.p_w_given_u = softmax_block(theta.logits, L.w_given_u(), d.k_W, d.k_U);
  p.p_x_given_u = softmax_block(theta.logits, L.x_given_u(), d.k_X, d.k_U);
  p.p_y_given_uwx = softmax_block(theta.logits, L.y_given_uwx(), d.k_Y, d.k_U * d.k_W * d.k_X);
  return p;
}

ThetaParams logits_from_spec(const ScmSpec& spec) {
  ThetaParams t;
  t.layout.dims = spec.dims;
  t.logits.resize(ix(t.layout.size()));
  write_log_block(spec.p_u_given_e.matrix(), t.layout.u_given_e(), t.logits);
  write_log_block(spec.q_u.vector(), t.layout.q_u(), t.logits);
  write_log_block(spec.p_w_given_u.matrix(), t.layout.w_given_u(), t.logits);
  write_log_block(spec.p_x_given_u.matrix(), t.layout.x_given_u(), t.logits);
  write_log_block(spec.p_y_given_uwx.matrix(), t.layout.y_given_uwx(), t.logits);
  if (!t.logits.allFinite()) throw InvalidInput("spec has zero probabilities; logits are not finite");
  return t;
}

double log_likelihood(const ThetaProbabilities& theta, const ContingencyCounts& counts) {
  return likelihood_impl(theta, counts, nullptr, nullptr);
}

double log_likelihood_with_gradient(const ThetaParams& theta, const ContingencyCounts& counts, Vector& grad) {
  const ThetaProbabilities p = logits_to_theta(theta);
  return likelihood_impl(p, counts, &grad, &theta.layout);
}

CausalFit fit_causal(const ContingencyCounts& counts, const FitOptions& opts) {
  if (counts.n == 0) throw InvalidInput("causal fit needs at least one record");
  if (opts.max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
  if (opts.restarts < 1) throw InvalidInput("restarts must be >= 1");

  ThetaLayout layout{fit_dims(counts.dims, opts)};
  const double scale = 1.0 / static_cast<double>(counts.n);
  const Objective objective = [&](const Vector& z, Vector& g) {
    const ThetaParams t{layout, z};
    const double ll = log_likelihood_with_gradient(t, counts, g);
    g *= -scale;
    return -ll * scale;
  };

  LbfgsOptions lopts;
  lopts.max_iterations = opts.max_iterations;
  lopts.grad_tol = opts.grad_tol;

  std::optional<CausalFit> best;
  bool any_improved = false;
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(opts.seed, r));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector z0(ix(layout.size()));
    for (Idx i = 0; i < z0.size(); ++i) z0(i) = unif(rng);

    Vector g0;
    const double f0 = objective(z0, g0);
    const LbfgsResult res = lbfgs_minimize(objective, z0, lopts);

    CausalFit fit;
    fit.theta = ThetaParams{layout, res.x};
    fit.log_likelihood = -res.f / scale;
    fit.initial_log_likelihood = -f0 / scale;
    fit.iterations = res.iterations;
    fit.status = res.status;
    fit.converged = res.status == LbfgsStatus::GradientConverged;
    fit.restart_index = r;
    if (res.f < f0) any_improved = true;
    if (!best || fit.log_likelihood > best->log_likelihood) best = fit;
  }
  best->improved = any_improved;
  return *best;
}

double g_of_theta(const ThetaProbabilities& theta, std::size_t x, std::size_t y) {
  const auto& d = theta.dims;
  if (x >= d.k_X || y >= d.k_Y) throw InvalidInput("(x, y) index out of range");
  double total = 0.0;
  for (std::size_t u = 0; u < d.k_U; ++u) {
    double inner = 0.0;
    for (std::size_t w = 0; w < d.k_W; ++w) inner += theta.p_y(y, u, w, x) * theta.p_w_given_u(ix(w), ix(u));
    total += inner * theta.q_u(ix(u));
  }
  return total;
}

EffectEstimate causal_estimate(const ContingencyCounts& counts, std::size_t x, std::size_t y,
                               const FitOptions& opts) {
  if (x >= counts.dims.k_X || y >= counts.dims.k_Y) throw InvalidInput("(x, y) index out of range");
  const CausalFit fit = fit_causal(counts, opts);
  const double value = g_of_theta(logits_to_theta(fit.theta), x, y);
  EffectEstimate est = clipped_estimate(value, std::nullopt, 0.05);
  est.n = counts.n;
  try {
    const EtaVector eta = eta_from_counts(counts, x, y);
    est.kappa_hat = condition_number(matrices_from_eta(eta.layout, eta.values).p_w_ex);
  } catch (const EmptyCellError&) {
    est.kappa_hat = std::numeric_limits<double>::quiet_NaN();
  }
  est.flags.misspecified_k_u = opts.k_U && *opts.k_U != counts.dims.k_U;
  return est;
}

EffectEstimate causal_estimate(const Dataset& ds, std::size_t x, std::size_t y, const FitOptions& opts) {
  return causal_estimate(ContingencyCounts::from_dataset(ds), x, y, opts);
}

}  // namespace proxyshift
