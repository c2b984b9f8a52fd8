#include <benchmark/benchmark.h>

#include <map>

#include "buslink/candidates.hpp"
#include "buslink/planner.hpp"
#include "buslink/synth.hpp"

using namespace buslink;

namespace {

struct BenchWorld {
  synth::SynthCity city;
  std::vector<CandidateEdge> candidates;
  std::vector<CandidateEdge> existing;
};

const BenchWorld& world(int rows) {
  static std::map<int, BenchWorld> cache;
  auto it = cache.find(rows);
  if (it != cache.end()) return it->second;
  BenchWorld w;
  synth::GridCityConfig gc;
  gc.rows = rows;
  gc.cols = rows;
  gc.trajectories = 40 * rows;
  gc.seed = 11;
  w.city = synth::make_grid_city(gc);
  PlannerConfig cfg;
  cfg.spectral.probes = 12;
  cfg.spectral.lanczos_steps = 8;
  w.candidates = generate_candidate_edges(w.city.road, w.city.transit, cfg.tau_m, nullptr, 4);
  const auto A = w.city.transit.adjacency_matrix();
  compute_connectivity_increments(A, w.candidates, cfg.spectral, false, 4);
  w.existing = annotate_existing_edges(w.city.road, w.city.transit, 4);
  return cache.emplace(rows, std::move(w)).first->second;
}

}  // namespace

static void BM_eta_pre(benchmark::State& state) {
  const auto& w = world(static_cast<int>(state.range(0)));
  PlannerConfig cfg;
  cfg.k = 10;
  cfg.sn = 200;
  cfg.it_max = 100;
  cfg.mode = Mode::kPre;
  const auto inputs =
      build_planner_inputs(w.city.road, w.city.transit, w.candidates, w.existing, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_eta(inputs, cfg));
  }
}
BENCHMARK(BM_eta_pre)->Arg(20)->Arg(45)->Unit(benchmark::kMillisecond);

static void BM_eta_online(benchmark::State& state) {
  const auto& w = world(static_cast<int>(state.range(0)));
  PlannerConfig cfg;
  cfg.k = 10;
  cfg.sn = 200;
  cfg.it_max = 100;
  cfg.mode = Mode::kOnline;
  const auto inputs =
      build_planner_inputs(w.city.road, w.city.transit, w.candidates, w.existing, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_eta(inputs, cfg));
  }
}
BENCHMARK(BM_eta_online)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_candidate_generation(benchmark::State& state) {
  const auto& w = world(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_candidate_edges(w.city.road, w.city.transit, 500.0, nullptr, 1));
  }
}
BENCHMARK(BM_candidate_generation)->Arg(20)->Arg(45)->Unit(benchmark::kMillisecond);

static void BM_road_shortest_path(benchmark::State& state) {
  const auto& w = world(45);
  const auto n = static_cast<std::int64_t>(w.city.road.vertex_count());
  std::int64_t i = 0;
  for (auto _ : state) {
    const auto from = w.city.road.id_of(static_cast<std::int32_t>(i % n));
    const auto to = w.city.road.id_of(static_cast<std::int32_t>((i * 37 + 11) % n));
    if (from != to) benchmark::DoNotOptimize(w.city.road.shortest_path(from, to));
    ++i;
  }
}
BENCHMARK(BM_road_shortest_path);
