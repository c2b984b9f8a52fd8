#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "buslink/candidates.hpp"
#include "buslink/errors.hpp"
#include "buslink/eval.hpp"
#include "buslink/synth.hpp"
#include "support/testnets.hpp"

using namespace buslink;

namespace {

/// Two parallel horizontal routes joined by one connector route at column 0;
/// a planned link on column `cols-1` would save a transfer.
struct EvalWorld {
  RoadNetwork road;
  TransitNetwork transit;
};

EvalWorld two_route_world() {
  EvalWorld w;
  synth::GridCityConfig gc;
  gc.rows = 2;
  gc.cols = 4;
  gc.vertical_route_step = 4;  // vertical route only at column 0
  gc.trajectories = 0;
  auto city = synth::make_grid_city(gc);
  w.road = std::move(city.road);
  w.transit = std::move(city.transit);
  return w;
}

}  // namespace

TEST_CASE("min_transfers: greedy label covering") {
  auto w = two_route_world();
  // Bottom row is route 1, top row route 2, the column-0 link belongs to
  // route 3. Riding bottom-row -> connector -> top-row takes two transfers.
  const auto& t = w.transit;
  const auto e1 = *t.edge_index(t.stop_index(1), t.stop_index(2));
  const auto e2 = *t.edge_index(t.stop_index(1), t.stop_index(5));
  const auto e3 = *t.edge_index(t.stop_index(5), t.stop_index(6));
  CHECK(eval::min_transfers(t, {e1}) == 0);
  CHECK(eval::min_transfers(t, {e1, e2}) == 1);
  CHECK(eval::min_transfers(t, {e1, e2, e3}) == 2);
}

TEST_CASE("transfer metrics: identical networks give zeta = 1") {
  auto w = two_route_world();
  const auto lengths = eval::transit_edge_lengths(w.transit, w.road);
  const std::vector<std::int32_t> mu{w.transit.stop_index(1), w.transit.stop_index(2),
                                     w.transit.stop_index(3)};
  const auto m = eval::transfer_metrics(mu, w.transit, lengths, w.transit, lengths);
  CHECK(m.distance_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.pairs_skipped == 0);
}

TEST_CASE("transfer metrics: a direct new link removes a one-transfer trip") {
  auto w = two_route_world();
  // Plan the column-3 rung: stops 4 (bottom) and 8 (top) by external id.
  const auto a = w.transit.stop_index(4);
  const auto b = w.transit.stop_index(8);
  TransitNetwork augmented = w.transit;
  augmented.add_route(99, {a, b});
  const auto old_lengths = eval::transit_edge_lengths(w.transit, w.road);
  const auto new_lengths = eval::transit_edge_lengths(augmented, w.road);

  const std::vector<std::int32_t> mu{a, b};
  const auto m = eval::transfer_metrics(mu, w.transit, old_lengths, augmented, new_lengths);
  CHECK(m.pairs_evaluated == 1);
  // Old network: ride to column 0, switch to the connector, switch again.
  CHECK(m.transfers_avoided == doctest::Approx(2.0));
  // The only old-network route runs down the bottom row, up the column-0
  // connector and along the top row; the new network rides the rung directly.
  const auto elen = [&](const TransitNetwork& net, const std::vector<double>& lengths, StopId x,
                        StopId y) {
    return lengths[static_cast<std::size_t>(
        *net.edge_index(net.stop_index(x), net.stop_index(y)))];
  };
  const double old_dist = elen(w.transit, old_lengths, 4, 3) + elen(w.transit, old_lengths, 3, 2) +
                          elen(w.transit, old_lengths, 2, 1) + elen(w.transit, old_lengths, 1, 5) +
                          elen(w.transit, old_lengths, 5, 6) + elen(w.transit, old_lengths, 6, 7) +
                          elen(w.transit, old_lengths, 7, 8);
  const double new_dist = elen(augmented, new_lengths, 4, 8);
  CHECK(m.distance_ratio == doctest::Approx(old_dist / new_dist).epsilon(1e-9));
  CHECK(m.distance_ratio > 1.0);
  CHECK(m.crossed_routes == 2);

  // In the augmented network the pair rides the new route directly.
  const auto direct = eval::transfer_metrics(mu, augmented, new_lengths, augmented, new_lengths);
  CHECK(direct.transfers_avoided == doctest::Approx(0.0));
}

TEST_CASE("transfer metrics: zeta is at least one on a superset network") {
  auto w = two_route_world();
  TransitNetwork augmented = w.transit;
  augmented.add_route(99, {w.transit.stop_index(2), w.transit.stop_index(6)});
  const auto old_lengths = eval::transit_edge_lengths(w.transit, w.road);
  const auto new_lengths = eval::transit_edge_lengths(augmented, w.road);
  for (StopId s : {1, 2, 3, 4}) {
    for (StopId t : {5, 6, 7, 8}) {
      const std::vector<std::int32_t> mu{w.transit.stop_index(s), w.transit.stop_index(t)};
      const auto m = eval::transfer_metrics(mu, w.transit, old_lengths, augmented, new_lengths);
      if (m.pairs_evaluated > 0) CHECK(m.distance_ratio >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("transfer metrics: disconnected pairs are skipped and tallied") {
  RoadNetwork road = testsupport::line_road(4);
  TransitNetwork net;
  for (int i = 1; i <= 4; ++i) {
    Stop s;
    s.id = i;
    s.road_vertex = i;
    s.pos = road.point_by_id(i);
    net.add_stop(s);
  }
  net.add_route(1, {net.stop_index(1), net.stop_index(2)});
  net.add_route(2, {net.stop_index(3), net.stop_index(4)});  // disconnected component
  const auto lengths = eval::transit_edge_lengths(net, road);
  const std::vector<std::int32_t> mu{net.stop_index(1), net.stop_index(2), net.stop_index(3)};
  const auto m = eval::transfer_metrics(mu, net, lengths, net, lengths);
  CHECK(m.pairs_skipped == 2);   // (1,3) and (2,3)
  CHECK(m.pairs_evaluated == 1);  // (1,2)
}

TEST_CASE("monotonicity experiment: non-increasing with zero at full removal (exact)") {
  synth::GridCityConfig gc;
  gc.rows = 5;
  gc.cols = 5;
  gc.trajectories = 0;
  auto city = synth::make_grid_city(gc);
  spectral::SpectralParams p;
  const auto points = eval::monotonicity_experiment(city.transit, 6, p, /*exact=*/true, 3);
  REQUIRE(points.size() >= 3);
  CHECK(points.front().routes_removed == 0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].lambda <= points[i - 1].lambda + 1e-12);
  }
  CHECK(points.back().fraction_removed == doctest::Approx(1.0));
  CHECK(points.back().lambda == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("monotonicity experiment: reproducible under a fixed seed") {
  synth::GridCityConfig gc;
  gc.rows = 4;
  gc.cols = 4;
  gc.trajectories = 0;
  auto city = synth::make_grid_city(gc);
  spectral::SpectralParams p;
  const auto a = eval::monotonicity_experiment(city.transit, 5, p, true, 11);
  const auto b = eval::monotonicity_experiment(city.transit, 5, p, true, 11);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lambda == b[i].lambda);
    CHECK(a[i].routes_removed == b[i].routes_removed);
  }
}

TEST_CASE("submodularity experiment: single-edge theta is exactly zero") {
  synth::GridCityConfig gc;
  gc.rows = 4;
  gc.cols = 4;
  gc.trajectories = 0;
  auto city = synth::make_grid_city(gc);
  auto cands = generate_candidate_edges(city.road, city.transit, 500.0);
  REQUIRE(!cands.empty());
  const auto A = city.transit.adjacency_matrix();
  spectral::SpectralParams p;
  const auto samples = eval::submodularity_experiment(A, cands, {1}, 8, p, /*exact=*/true, 5);
  REQUIRE(!samples.empty());
  for (const auto& s : samples) {
    CHECK(s.theta == 0.0);
  }
}

TEST_CASE("submodularity experiment: deterministic under a fixed seed") {
  synth::GridCityConfig gc;
  gc.rows = 4;
  gc.cols = 4;
  gc.trajectories = 0;
  auto city = synth::make_grid_city(gc);
  auto cands = generate_candidate_edges(city.road, city.transit, 500.0);
  const auto A = city.transit.adjacency_matrix();
  spectral::SpectralParams p;
  const auto a = eval::submodularity_experiment(A, cands, {1, 3}, 5, p, true, 7);
  const auto b = eval::submodularity_experiment(A, cands, {1, 3}, 5, p, true, 7);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta == b[i].theta);
  }
}

TEST_CASE("csv emitters carry documented headers") {
  CHECK(eval::monotonicity_csv({}).rfind("routes_removed,fraction_removed,lambda\n", 0) == 0);
  CHECK(eval::theta_csv({}).rfind("size,trial,o_lambda,delta_sum,theta\n", 0) == 0);
  CHECK(eval::bounds_csv({}).rfind(
            "k,lambda_old,lambda_new,estrada_bound,general_bound,path_bound,increment\n", 0) == 0);
}
