#include <benchmark/benchmark.h>

#include "spinlab/spectral.hpp"

using namespace spinlab;

namespace {

void BM_IharaBassResidual(benchmark::State& state) {
  Rng rng(31);
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) Q(i, j) = Q(j, i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(ihara_bass_residual(Q, 0.05));
}
BENCHMARK(BM_IharaBassResidual)->Arg(6)->Arg(10);

void BM_SpectralRadiusDense(benchmark::State& state) {
  Rng rng(32);
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) Q(i, j) = Q(j, i) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(Q));
}
BENCHMARK(BM_SpectralRadiusDense)->Arg(50)->Arg(200);

}  // namespace
