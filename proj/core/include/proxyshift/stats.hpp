#pragma once

#include <span>
#include <vector>

namespace proxyshift::stats {

double normal_cdf(double x);

/// Inverse standard-normal CDF: Acklam's rational approximation refined by
/// one Halley step, accurate to ~1e-15 on (0, 1).
double normal_quantile(double p);

double mean(std::span<const double> xs);
/// Sample standard deviation with the n - 1 denominator; 0 for n < 2.
double stddev(std::span<const double> xs);
double median(std::vector<double> xs);

/// Average ranks (ties share their mean rank), 1-based.
std::vector<double> ranks(std::span<const double> xs);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

struct KsResult {
  double statistic;  // sup |F_n - Phi|
  double p_value;    // asymptotic Kolmogorov distribution
};
/// One-sample Kolmogorov-Smirnov test against N(0, 1).
KsResult ks_test_standard_normal(std::vector<double> xs);

}  // namespace proxyshift::stats
