#pragma once

// Seeded random streams. Every stochastic routine takes an explicit Rng so
// results are a pure function of the seeds handed in.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "proxyshift/linalg.hpp"

namespace proxyshift {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; good avalanche for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the stream identified by (master, a, b). Distinct index tuples
/// give statistically independent streams regardless of scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Flat Dirichlet draw of length k via normalised unit-rate Gamma variates.
Vector sample_flat_dirichlet(std::size_t k, Rng& rng);

/// Draws an index from a pmf given as a cumulative table (last entry ~1).
std::size_t sample_from_cdf(std::span<const double> cdf, Rng& rng);

/// Cumulative sums of a pmf, with the last entry forced to exactly 1.
std::vector<double> cumulative(std::span<const double> pmf);

/// Multinomial(n, probs) counts via sequential conditional binomials.
std::vector<std::uint64_t> sample_multinomial(std::uint64_t n, std::span<const double> probs, Rng& rng);

}  // namespace proxyshift
