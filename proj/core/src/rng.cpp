#include "proxyshift/rng.hpp"

#include <algorithm>

namespace proxyshift {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(mix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

Vector sample_flat_dirichlet(std::size_t k, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(k));
  if (k == 1) {
    v(0) = 1.0;
    return v;
  }
  std::gamma_distribution<double> gamma(1.0, 1.0);
  double total = 0.0;
  do {
    total = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) = gamma(rng);
      total += v(i);
    }
  } while (!(total > 0.0));
  v /= total;
  return v;
}

std::size_t sample_from_cdf(std::span<const double> cdf, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf.begin());
  return std::min(idx, cdf.size() - 1);
}

std::vector<double> cumulative(std::span<const double> pmf) {
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    cdf[i] = acc;
  }
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

std::vector<std::uint64_t> sample_multinomial(std::uint64_t n, std::span<const double> probs, Rng& rng) {
  std::vector<std::uint64_t> out(probs.size(), 0);
  double remaining_mass = 1.0;
  std::uint64_t remaining = n;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double p = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> binom(remaining, p);
    out[i] = binom(rng);
    remaining -= out[i];
    remaining_mass -= probs[i];
  }
  if (!probs.empty()) out.back() += remaining;
  return out;
}

}  // namespace proxyshift
