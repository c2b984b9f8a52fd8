#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <utility>
#include <vector>

#include "buslink/road_network.hpp"
#include "buslink/transit_network.hpp"

namespace buslink::synth {

/// Grid city: a rows x cols road lattice, horizontal bus routes on every row,
/// vertical routes on every `vertical_route_step`-th column, and seeded random
/// shortest-path commuter trajectories. Vertical stop pairs on the remaining
/// columns sit one grid cell apart, giving a rich new-edge candidate pool.
struct GridCityConfig {
  int rows = 10;
  int cols = 10;
  double spacing_m = 400.0;
  int vertical_route_step = 3;
  int trajectories = 400;
  std::uint64_t seed = 1;
  GeoPoint origin{40.70, -74.01};
};

struct SynthCity {
  RoadNetwork road;
  TransitNetwork transit;
  std::vector<std::vector<RoadVertexId>> trajectories;
};

SynthCity make_grid_city(const GridCityConfig& config);

/// Random connected graph: a locality-biased spanning tree plus extra short
/// range edges up to the requested mean degree. Deterministic in `seed`.
Eigen::SparseMatrix<double> random_connected_adjacency(int n, double mean_degree,
                                                       std::uint64_t seed);

/// k-edge simple path whose edges are all absent from A (vertices may be
/// existing). Empty result when the sampler fails to place one.
std::vector<std::pair<std::int32_t, std::int32_t>> sample_new_path(
    const Eigen::SparseMatrix<double>& A, int k, std::uint64_t seed);

/// k distinct edges absent from A, no simple-path constraint.
std::vector<std::pair<std::int32_t, std::int32_t>> sample_new_edges(
    const Eigen::SparseMatrix<double>& A, int k, std::uint64_t seed);

}  // namespace buslink::synth
