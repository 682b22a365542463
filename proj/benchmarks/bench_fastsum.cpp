#include <benchmark/benchmark.h>

#include "qmcslice/dataset.hpp"
#include "qmcslice/directions.hpp"
#include "qmcslice/fastsum.hpp"
#include "qmcslice/kernels.hpp"

using namespace qmcslice;

namespace {

SummationProblem blobs(int n, int d) { return {gaussian_blobs(n, d, 1), gaussian_blobs(n, d, 2)}; }

// Arguments: N (= M), P.
void BM_FourierSliceGauss(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), P = static_cast<int>(state.range(1)), d = 16;
  const auto prob = blobs(n, d);
  const auto k = KernelSpec::gauss(median_rule(prob.x, prob.y, ScaleRule{}, 0), d);
  const auto plan = build_fourier_plan(prob, k);
  const auto dirs = iid_uniform(P, d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fourier_slice_sum(prob, plan, dirs));
  state.SetItemsProcessed(state.iterations() * P * 2 * n);
}
BENCHMARK(BM_FourierSliceGauss)
    ->ArgsProduct({{1 << 12, 1 << 14, 1 << 15}, {32, 128}})
    ->Unit(benchmark::kMillisecond);

void BM_FourierSliceLaplace(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 16;
  const auto prob = blobs(n, d);
  const auto k = KernelSpec::laplace(1.0 / median_rule(prob.x, prob.y, ScaleRule{}, 0), d);
  const auto plan = build_fourier_plan(prob, k);
  const auto dirs = iid_uniform(64, d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fourier_slice_sum(prob, plan, dirs));
}
BENCHMARK(BM_FourierSliceLaplace)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_SortingSlice(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 16;
  const auto prob = blobs(n, d);
  const auto k = KernelSpec::riesz(1.0, d);
  const auto dirs = iid_uniform(64, d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sorting_slice_sum(prob, k, dirs));
}
BENCHMARK(BM_SortingSlice)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_RffSum(benchmark::State& state) {
  const int n = 1 << 12, D = static_cast<int>(state.range(0)), d = 16;
  const auto prob = blobs(n, d);
  const auto k = KernelSpec::gauss(median_rule(prob.x, prob.y, ScaleRule{}, 0), d);
  for (auto _ : state) benchmark::DoNotOptimize(rff_sum(prob, k, D, 5));
}
BENCHMARK(BM_RffSum)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NaiveSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 16;
  const auto prob = blobs(n, d);
  const auto k = KernelSpec::gauss(1.0, d);
  for (auto _ : state) benchmark::DoNotOptimize(naive_sum(prob, k));
}
BENCHMARK(BM_NaiveSum)->Arg(1 << 10)->Arg(1 << 12)->Unit(benchmark::kMillisecond);

void BM_DistanceDesign(benchmark::State& state) {
  const int P = static_cast<int>(state.range(0));
  EnergyOptConfig cfg;
  cfg.steps = 100;
  for (auto _ : state) benchmark::DoNotOptimize(distance_design(P, 16, cfg));
}
BENCHMARK(BM_DistanceDesign)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
