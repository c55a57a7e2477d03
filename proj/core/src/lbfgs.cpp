#include "proxyshift/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace proxyshift {

namespace {

struct LinePoint {
  double alpha;
  double f;
  double slope;  // directional derivative
};

// Minimiser of the cubic interpolating (a, fa, da) and (b, fb, db),
// safeguarded to the interior of [a, b].
double cubic_step(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    if (std::isfinite(cand)) t = cand;
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(t, lo + margin, hi - margin);
}

struct LineSearch {
  const Objective& f;
  const LbfgsOptions& opts;
  std::size_t evaluations = 0;

  LinePoint eval(const Vector& x, const Vector& dir, double alpha, Vector& grad_out) {
    ++evaluations;
    const Vector trial = x + alpha * dir;
    const double fv = f(trial, grad_out);
    return {alpha, fv, grad_out.dot(dir)};
  }

  // Returns the accepted step (alpha > 0) or nullopt-like alpha = 0.
  LinePoint run(const Vector& x, double f0, double slope0, const Vector& dir, double alpha_init, Vector& grad_out) {
    const LinePoint origin{0.0, f0, slope0};
    LinePoint prev = origin;
    double alpha = alpha_init;
    Vector g(x.size());
    for (std::size_t it = 0; it < opts.max_line_search; ++it) {
      LinePoint cur = eval(x, dir, alpha, g);
      if (!std::isfinite(cur.f) || cur.f > f0 + opts.c1 * alpha * slope0 || (it > 0 && cur.f >= prev.f)) {
        return zoom(x, f0, slope0, dir, prev, cur, grad_out);
      }
      if (std::abs(cur.slope) <= -opts.c2 * slope0) {
        grad_out = g;
        return cur;
      }
      if (cur.slope >= 0.0) return zoom(x, f0, slope0, dir, cur, prev, grad_out);
      prev = cur;
      alpha *= 2.0;
    }
    return {0.0, f0, slope0};
  }

  LinePoint zoom(const Vector& x, double f0, double slope0, const Vector& dir, LinePoint lo, LinePoint hi,
                 Vector& grad_out) {
    Vector g(x.size());
    LinePoint best_sufficient{0.0, f0, slope0};
    Vector best_grad;
    for (std::size_t it = 0; it < opts.max_line_search; ++it) {
      double alpha;
      if (std::isfinite(hi.f) && std::isfinite(lo.f)) {
        alpha = cubic_step(lo, hi);
      } else {
        alpha = 0.5 * (lo.alpha + hi.alpha);
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      LinePoint cur = eval(x, dir, alpha, g);
      if (!std::isfinite(cur.f) || cur.f > f0 + opts.c1 * alpha * slope0 || cur.f >= lo.f) {
        hi = cur;
        continue;
      }
      if (cur.f < best_sufficient.f) {
        best_sufficient = cur;
        best_grad = g;
      }
      if (std::abs(cur.slope) <= -opts.c2 * slope0) {
        grad_out = g;
        return cur;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
    }
    // Accept the best point satisfying sufficient decrease, if any.
    if (best_sufficient.alpha > 0.0) {
      grad_out = best_grad;
      return best_sufficient;
    }
    return {0.0, f0, slope0};
  }
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const LbfgsOptions& opts) {
  LbfgsResult res;
  res.x = std::move(x0);
  Vector grad(res.x.size());
  res.f = f(res.x, grad);
  res.evaluations = 1;

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  LineSearch ls{f, opts};

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    if (grad.size() == 0 || grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.status = LbfgsStatus::GradientConverged;
      res.evaluations += ls.evaluations;
      return res;
    }

    // Two-loop recursion.
    Vector q = grad;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alphas[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alphas[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Vector dir = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alphas[i] - beta) * s_hist[i];
    }
    dir = -dir;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      // Lost descent; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad;
      slope = grad.dot(dir);
    }

    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>()) : 1.0;
    Vector new_grad(res.x.size());
    const LinePoint step = ls.run(res.x, res.f, slope, dir, alpha0, new_grad);
    if (step.alpha <= 0.0 || !(step.f <= res.f)) {
      if (!s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.status = LbfgsStatus::LineSearchStalled;
      res.evaluations += ls.evaluations;
      return res;
    }

    const Vector s = step.alpha * dir;
    const Vector yv = new_grad - grad;
    res.x += s;
    res.f = step.f;
    grad = new_grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  res.status = LbfgsStatus::MaxIterations;
  res.evaluations += ls.evaluations;
  return res;
}

}  // namespace proxyshift
