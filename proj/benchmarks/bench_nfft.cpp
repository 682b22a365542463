#include <benchmark/benchmark.h>

#include <vector>

#include "qmcslice/nfft1d.hpp"
#include "qmcslice/rng.hpp"

using namespace qmcslice;

namespace {

std::vector<double> nodes(int n) {
  Rng rng(1);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform() - 0.5;
  return x;
}

void BM_NfftAdjoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int n_ft = static_cast<int>(state.range(1));
  const NfftPlan plan(n_ft);
  const auto x = nodes(n);
  const std::vector<double> w(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(plan.adjoint(x, w));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_NfftAdjoint)->ArgsProduct({{1 << 12, 1 << 14, 1 << 16}, {128, 1024}});

void BM_NfftForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int n_ft = static_cast<int>(state.range(1));
  const NfftPlan plan(n_ft);
  const auto x = nodes(n);
  const std::vector<Complex> c(n_ft, Complex(1.0, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(plan.forward(x, c));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_NfftForward)->ArgsProduct({{1 << 12, 1 << 14, 1 << 16}, {128, 1024}});

void BM_DirectAdjoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = nodes(n);
  const std::vector<Complex> w(n, Complex(1.0, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(direct_adjoint(x, w, 128));
}
BENCHMARK(BM_DirectAdjoint)->Arg(1 << 10)->Arg(1 << 12);

}  // namespace
