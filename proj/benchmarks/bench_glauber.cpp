#include <benchmark/benchmark.h>

#include "spinlab/glauber.hpp"

using namespace spinlab;

namespace {

GibbsModel bench_model(int n) {
  Rng rng(11);
  SparseGraph g = sample_gnp(n, 4.0, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  return make_model(std::move(g), std::move(c), 0.3);
}

void BM_GlauberSweep(benchmark::State& state) {
  const GibbsModel m = bench_model(static_cast<int>(state.range(0)));
  Rng rng(12);
  SpinVector s = all_minus(m.n());
  for (auto _ : state) {
    for (int t = 0; t < m.n(); ++t) glauber_step(s, m, rng);
  }
  state.SetItemsProcessed(state.iterations() * m.n());
}
BENCHMARK(BM_GlauberSweep)->Arg(100)->Arg(1000)->Arg(10000);

void BM_TransitionMatrix(benchmark::State& state) {
  const GibbsModel m = bench_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transition_matrix(m));
}
BENCHMARK(BM_TransitionMatrix)->Arg(8)->Arg(10);

}  // namespace
