#include <benchmark/benchmark.h>

#include "buslink/spectral.hpp"
#include "buslink/synth.hpp"

using namespace buslink;

static void BM_trace_estimate(benchmark::State& state) {
  const auto A = synth::random_connected_adjacency(static_cast<int>(state.range(0)), 2.4, 7);
  spectral::SpectralParams p;  // s = 50, t = 10
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::estimate_trace_exp(A, p));
  }
}
BENCHMARK(BM_trace_estimate)->Arg(500)->Arg(2000)->Arg(8000);

static void BM_connectivity_exact(benchmark::State& state) {
  const auto A = synth::random_connected_adjacency(static_cast<int>(state.range(0)), 2.4, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::natural_connectivity_exact(A));
  }
}
BENCHMARK(BM_connectivity_exact)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_lanczos_quadform(benchmark::State& state) {
  const auto A = synth::random_connected_adjacency(static_cast<int>(state.range(0)), 2.4, 7);
  const Eigen::VectorXd v = spectral::gaussian_probe(A.rows(), 1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::lanczos_quadform_exp(A, v, 10));
  }
}
BENCHMARK(BM_lanczos_quadform)->Arg(2000)->Arg(20000);

static void BM_top_eigenvalues(benchmark::State& state) {
  const auto A = synth::random_connected_adjacency(2000, 2.4, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::top_eigenvalues(A, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_top_eigenvalues)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
