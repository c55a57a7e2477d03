#pragma once

// Limited-memory BFGS for smooth unconstrained minimisation, with a
// strong-Wolfe line search (bracketing + cubic zoom).

#include <cstddef>
#include <functional>

#include "proxyshift/linalg.hpp"

namespace proxyshift {

struct LbfgsOptions {
  std::size_t max_iterations = 50000;
  double grad_tol = 1e-8;  // stop when ||grad||_inf < grad_tol
  std::size_t history = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  std::size_t max_line_search = 40;
};

enum class LbfgsStatus { GradientConverged, MaxIterations, LineSearchStalled };

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

/// Objective: returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

/// Accepted iterates have non-increasing objective values.
LbfgsResult lbfgs_minimize(const Objective& f, Vector x0, const LbfgsOptions& opts = {});

}  // namespace proxyshift
