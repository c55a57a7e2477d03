#include "proxyshift/baselines.hpp"

#include "proxyshift/errors.hpp"
#include "proxyshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace proxyshift {

namespace {

void check_xy(const CategorySpec& d, std::size_t x, std::size_t y) {
  if (x >= d.k_X) throw InvalidInput("x index " + std::to_string(x) + " out of range");
  if (y >= d.k_Y) throw InvalidInput("y index " + std::to_string(y) + " out of range");
}

// Visits (w, x, y) of every in-scope unit.
template <class Visit>
void for_each_unit(const Dataset& ds, Visit&& visit) {
  for (const Record& r : ds.records) {
    if (!r.is_target()) visit(r.w, *r.x, *r.y);
  }
}

template <class Visit>
void for_each_unit(const TargetOutcomes& t, Visit&& visit) {
  for (const auto& u : t.units) visit(u.w, u.x, u.y);
}

// n(w, x, y) over in-scope units; counting first keeps the scan branch-free.
struct WxyTable {
  std::size_t k_W, k_X, k_Y;
  std::vector<std::size_t> n;

  std::size_t at(std::size_t w, std::size_t x, std::size_t y) const { return n[(w * k_X + x) * k_Y + y]; }
};

template <class Source>
WxyTable tabulate(const Source& src, const CategorySpec& d) {
  WxyTable t{d.k_W, d.k_X, d.k_Y, std::vector<std::size_t>(d.k_W * d.k_X * d.k_Y, 0)};
  for_each_unit(src, [&](std::size_t w, std::size_t x, std::size_t y) { ++t.n[(w * t.k_X + x) * t.k_Y + y]; });
  return t;
}

double ratio_estimate(const WxyTable& t, std::size_t x, std::size_t y) {
  std::size_t num = 0, den = 0;
  for (std::size_t w = 0; w < t.k_W; ++w)
    for (std::size_t yy = 0; yy < t.k_Y; ++yy) {
      den += t.at(w, x, yy);
      if (yy == y) num += t.at(w, x, yy);
    }
  if (den == 0) throw EmptyCellError("no record with the requested x");
  return static_cast<double>(num) / static_cast<double>(den);
}

double w_adjust(const WxyTable& t, std::size_t x, std::size_t y) {
  std::vector<std::size_t> n_w(t.k_W, 0), n_xw(t.k_W, 0), n_yxw(t.k_W, 0);
  std::size_t n = 0;
  for (std::size_t w = 0; w < t.k_W; ++w)
    for (std::size_t xx = 0; xx < t.k_X; ++xx)
      for (std::size_t yy = 0; yy < t.k_Y; ++yy) {
        const std::size_t c = t.at(w, xx, yy);
        n += c;
        n_w[w] += c;
        if (xx != x) continue;
        n_xw[w] += c;
        if (yy == y) n_yxw[w] += c;
      }
  if (n == 0) throw EmptyCellError("no records for W-adjustment");
  double total = 0.0;
  for (std::size_t j = 0; j < t.k_W; ++j) {
    if (n_w[j] == 0) continue;
    if (n_xw[j] == 0) {
      throw EmptyCellError("no record with the requested x and w = " + std::to_string(j + 1));
    }
    total += static_cast<double>(n_yxw[j]) / static_cast<double>(n_xw[j]) *
             (static_cast<double>(n_w[j]) / static_cast<double>(n));
  }
  return total;
}

}  // namespace

double oracle_estimate(std::span<const std::size_t> y_draws, std::size_t y) {
  if (y_draws.empty()) throw InvalidInput("oracle estimate needs at least one draw");
  const auto hits = std::count(y_draws.begin(), y_draws.end(), y);
  return static_cast<double>(hits) / static_cast<double>(y_draws.size());
}

double no_adjustment(const Dataset& ds, std::size_t x, std::size_t y) {
  check_xy(ds.dims, x, y);
  return ratio_estimate(tabulate(ds, ds.dims), x, y);
}

double no_adjustment(const TargetOutcomes& target, std::size_t x, std::size_t y) {
  check_xy(target.dims, x, y);
  return ratio_estimate(tabulate(target, target.dims), x, y);
}

double w_adjustment(const Dataset& ds, std::size_t x, std::size_t y) {
  check_xy(ds.dims, x, y);
  return w_adjust(tabulate(ds, ds.dims), x, y);
}

double w_adjustment(const TargetOutcomes& target, std::size_t x, std::size_t y) {
  check_xy(target.dims, x, y);
  return w_adjust(tabulate(target, target.dims), x, y);
}

ConfidenceInterval wald_interval(double p, std::size_t n, double alpha) {
  if (n == 0) throw InvalidInput("Wald interval needs n >= 1");
  ConfidenceInterval ci;
  ci.alpha = alpha;
  const double half = stats::normal_quantile(1.0 - alpha / 2.0) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  ci.lower_unclipped = p - half;
  ci.upper_unclipped = p + half;
  ci.lower = std::clamp(ci.lower_unclipped, 0.0, 1.0);
  ci.upper = std::clamp(ci.upper_unclipped, 0.0, 1.0);
  return ci;
}

}  // namespace proxyshift
