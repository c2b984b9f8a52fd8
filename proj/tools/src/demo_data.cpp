// Emits a small synthetic city (road network, transit network, trajectories)
// so the pipeline can be exercised without external datasets.
#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "buslink/netio.hpp"
#include "buslink/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"buslink-demo-data: write a synthetic grid city to disk"};
  std::string out_dir = ".";
  int rows = 10;
  int cols = 10;
  double spacing = 400.0;
  int trajectories = 400;
  std::uint64_t seed = 1;
  app.add_option("--out-dir", out_dir, "Output directory (must exist)");
  app.add_option("--rows", rows, "Grid rows");
  app.add_option("--cols", cols, "Grid columns");
  app.add_option("--spacing", spacing, "Grid spacing in meters");
  app.add_option("--trajectories", trajectories, "Number of commuter trajectories");
  app.add_option("--seed", seed, "RNG seed");
  CLI11_PARSE(app, argc, argv);

  try {
    buslink::synth::GridCityConfig cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.spacing_m = spacing;
    cfg.trajectories = trajectories;
    cfg.seed = seed;
    const auto city = buslink::synth::make_grid_city(cfg);
    buslink::io::save_road_network(city.road,
                                   {out_dir + "/road.gr", out_dir + "/road.co"});
    buslink::io::save_transit_network(city.transit, out_dir + "/transit.json");
    buslink::io::save_trajectories(city.trajectories, out_dir + "/trajectories.txt");
    std::cout << "wrote road.gr, road.co, transit.json, trajectories.txt to " << out_dir << "\n"
              << "stops: " << city.transit.stop_count() << ", transit edges: "
              << city.transit.edge_count() << ", road vertices: " << city.road.vertex_count()
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
