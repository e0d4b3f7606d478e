#include <benchmark/benchmark.h>

#include "spinlab/gibbs.hpp"

using namespace spinlab;

namespace {

GibbsModel bench_model(int n) {
  Rng rng(7);
  SparseGraph g = sample_gnp(n, 3.0, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  return make_model(std::move(g), std::move(c), 0.5);
}

void BM_ExactDistribution(benchmark::State& state) {
  const GibbsModel m = bench_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_distribution(m));
}
BENCHMARK(BM_ExactDistribution)->Arg(10)->Arg(14)->Arg(18);

void BM_Covariance(benchmark::State& state) {
  const GibbsModel m = bench_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(covariance(m));
}
BENCHMARK(BM_Covariance)->Arg(8)->Arg(12);

}  // namespace
