#include <benchmark/benchmark.h>

#include "proxyshift/baselines.hpp"
#include "proxyshift/causal.hpp"
#include "proxyshift/linalg.hpp"
#include "proxyshift/reduced.hpp"
#include "proxyshift/rng.hpp"
#include "proxyshift/scm.hpp"

using namespace proxyshift;

namespace {

ScmSpec bench_spec(std::size_t k_E, std::size_t k_W) {
  CategorySpec d;
  d.k_E = k_E;
  d.k_U = k_W;
  d.k_W = k_W;
  d.k_X = 2;
  d.k_Y = 2;
  Rng rng(derive_seed(99, k_E, k_W));
  return sample_scm_spec(d, rng);
}

Dataset bench_data(std::size_t n, std::size_t k_E = 3, std::size_t k_W = 2) {
  Rng rng(derive_seed(7, n));
  return simulate_dataset(bench_spec(k_E, k_W), n, rng);
}

void BM_Simulate(benchmark::State& state) {
  const ScmSpec s = bench_spec(3, 2);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_dataset(s, static_cast<std::size_t>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ReducedEstimate(benchmark::State& state) {
  const Dataset ds = bench_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reduced_estimate(ds, 0, 0));
}
BENCHMARK(BM_ReducedEstimate)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ReducedFromCounts(benchmark::State& state) {
  const ContingencyCounts c = ContingencyCounts::from_dataset(bench_data(20000, 4, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(reduced_estimate(c, 0, 0));
}
BENCHMARK(BM_ReducedFromCounts)->Arg(2)->Arg(3)->Arg(4);

void BM_CausalEstimate(benchmark::State& state) {
  const ContingencyCounts c = ContingencyCounts::from_dataset(bench_data(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(causal_estimate(c, 0, 0));
}
BENCHMARK(BM_CausalEstimate)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Baselines(benchmark::State& state) {
  const Dataset ds = bench_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(no_adjustment(ds, 0, 0));
    benchmark::DoNotOptimize(w_adjustment(ds, 0, 0));
  }
}
BENCHMARK(BM_Baselines)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_Pseudoinverse(benchmark::State& state) {
  const auto k = static_cast<Eigen::Index>(state.range(0));
  Rng rng(3);
  Matrix a(k, k + 1);
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) = sample_flat_dirichlet(static_cast<std::size_t>(k), rng);
  for (auto _ : state) benchmark::DoNotOptimize(right_pseudoinverse(a));
}
BENCHMARK(BM_Pseudoinverse)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
