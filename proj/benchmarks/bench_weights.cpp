#include <benchmark/benchmark.h>

#include "spinlab/block_partition.hpp"

using namespace spinlab;

namespace {

void BM_SqrSphere(benchmark::State& state) {
  Rng rng(21);
  SparseGraph g = sample_gnp(200, 8.0, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  const GibbsModel m = make_model(g, c, 0.17);
  const WeightContext ctx = make_weight_context(m, 0.3, 8.0);
  int v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sqr_sphere(ctx, v % 200, static_cast<int>(state.range(0))));
    ++v;
  }
}
BENCHMARK(BM_SqrSphere)->Arg(3)->Arg(5);

void BM_BlockVertex(benchmark::State& state) {
  Rng rng(22);
  SparseGraph g = sample_gnp(200, 8.0, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  const GibbsModel m = make_model(g, c, 0.17);
  const WeightContext ctx = make_weight_context(m, 0.3, 8.0);
  int v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_block_vertex(ctx, v % 200, 0, 6));
    ++v;
  }
}
BENCHMARK(BM_BlockVertex);

}  // namespace
