#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "buslink/candidates.hpp"
#include "buslink/errors.hpp"
#include "buslink/planner.hpp"
#include "buslink/synth.hpp"
#include "support/oracles.hpp"
#include "support/testnets.hpp"

using namespace buslink;

namespace {

constexpr double kPi = 3.14159265358979323846;

RankedEdgeList list_from_keys(const std::vector<double>& keys) {
  std::vector<RankedEdgeList::Entry> entries;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    entries.push_back({static_cast<std::uint64_t>(i + 1), keys[i]});
  }
  return RankedEdgeList(std::move(entries));
}

struct Instance {
  synth::SynthCity city;
  std::vector<CandidateEdge> candidates;
  std::vector<CandidateEdge> existing;
};

Instance make_instance(int rows, int cols, std::uint64_t seed, const PlannerConfig& cfg,
                       int trajectories = 250) {
  Instance inst;
  synth::GridCityConfig gc;
  gc.rows = rows;
  gc.cols = cols;
  gc.trajectories = trajectories;
  gc.seed = seed;
  inst.city = synth::make_grid_city(gc);
  inst.candidates = generate_candidate_edges(inst.city.road, inst.city.transit, cfg.tau_m);
  const auto A = inst.city.transit.adjacency_matrix();
  compute_connectivity_increments(A, inst.candidates, cfg.spectral, /*exact=*/true);
  inst.existing = annotate_existing_edges(inst.city.road, inst.city.transit);
  return inst;
}

std::string canonical_route(const std::vector<std::int32_t>& stops) {
  std::vector<std::int32_t> fwd = stops;
  std::vector<std::int32_t> rev(stops.rbegin(), stops.rend());
  const auto& pick = fwd <= rev ? fwd : rev;
  std::string s;
  for (auto v : pick) s += std::to_string(v) + ",";
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  PlannerConfig c;
  CHECK_NOTHROW(validate(c));
  c.w = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.w = 0.5;
  c.k = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.k = 3;
  c.sn = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("combine objective arithmetic") {
  CHECK(combine_objective(0.5, 0.4, 0.2) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(combine_objective(1.0, 0.4, 0.9) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(combine_objective(0.0, 0.4, 0.9) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("seed bound: top-rank seed keeps the full top-k sum") {
  const auto L = list_from_keys({10, 8, 6});
  const auto sb = seed_bound(L, L.rank_of(1), 10.0, 2);
  CHECK(sb.ub_d == doctest::Approx(18.0));
  CHECK(sb.cur == 2);
}

TEST_CASE("seed bound: deep seed swaps against the k-th slot") {
  const auto L = list_from_keys({10, 8, 6});
  const auto sb = seed_bound(L, L.rank_of(3), 6.0, 2);
  CHECK(sb.ub_d == doctest::Approx(16.0));  // 18 - (8 - 6)
  CHECK(sb.cur == 1);
}

TEST_CASE("seed bound: off-list seed uses its own key") {
  const auto L = list_from_keys({10, 8, 6});
  const auto sb = seed_bound(L, std::nullopt, 5.0, 2);
  CHECK(sb.ub_d == doctest::Approx(15.0));  // 18 - (8 - 5)
  CHECK(sb.cur == 1);
}

TEST_CASE("seed bound: list shorter than k adds the off-list seed on top") {
  const auto L = list_from_keys({10, 8});
  const auto sb = seed_bound(L, std::nullopt, 5.0, 3);
  CHECK(sb.ub_d == doctest::Approx(23.0));  // whole list plus the seed itself
  CHECK(sb.cur == 2);
}

TEST_CASE("seed bound: empty list is an error") {
  RankedEdgeList empty;
  CHECK_THROWS_AS(seed_bound(empty, std::nullopt, 1.0, 3), ConfigError);
}

TEST_CASE("bound update: below-cursor append swaps out the worst free budget slot") {
  // Seed = rank-1 edge, cur = 3, ub_d = 24 over L = [10, 8, 6, 4, 2], k = 3.
  // Appending key 5 releases slot 3 (value 6): 24 - (6 - 5) = 23, matching the
  // full rescan 10 + 5 + 8.
  const auto L = list_from_keys({10, 8, 6, 4, 2});
  const std::set<std::uint64_t> path{1};
  const auto member = [&path](std::uint64_t e) { return path.count(e) != 0; };
  const auto out = update_bound_and_turns(5.0, 0.0, L, member, BoundTurnState{24.0, 0, 3}, 3,
                                          /*k=*/3, /*len_before=*/1);
  CHECK(out.ub_d == doctest::Approx(23.0));
  CHECK(out.cur == 2);
  const std::vector<std::pair<std::uint64_t, double>> oracle_list{
      {1, 10}, {2, 8}, {3, 6}, {4, 4}, {5, 2}};
  CHECK(out.ub_d ==
        doctest::Approx(testsupport::rescan_bound_oracle(oracle_list, {1, 99}, {10, 5}, 3)));
}

TEST_CASE("bound update: key at or above the cursor slot leaves the bound unchanged") {
  const auto L = list_from_keys({10, 8, 6, 4, 2});
  const auto member = [](std::uint64_t) { return false; };
  const auto out = update_bound_and_turns(7.0, 0.0, L, member, BoundTurnState{24.0, 0, 3}, 3,
                                          /*k=*/3, /*len_before=*/1);
  CHECK(out.ub_d == doctest::Approx(24.0));
  CHECK(out.cur == 3);
}

TEST_CASE("bound update: occupied slots are skipped before charging the gap") {
  // Seed = rank-2 edge (key 8), k = 3: ub 24, cur 3. Appending key 5 swaps
  // slot 3; the next append finds slot 2 owned by the seed and charges slot 1.
  const auto L = list_from_keys({10, 8, 6, 4, 2});
  std::set<std::uint64_t> path{2};
  const auto member = [&path](std::uint64_t e) { return path.count(e) != 0; };
  auto st = BoundTurnState{24.0, 0, 3};
  st = update_bound_and_turns(5.0, 0.0, L, member, st, 3, /*k=*/3, /*len_before=*/1);
  CHECK(st.ub_d == doctest::Approx(23.0));  // rescan: 8 + 5 + 10
  CHECK(st.cur == 2);
  path.insert(90);
  st = update_bound_and_turns(3.0, 0.0, L, member, st, 3, /*k=*/3, /*len_before=*/2);
  CHECK(st.ub_d == doctest::Approx(16.0));  // rescan: 8 + 5 + 3, slot 1 released
  CHECK(st.cur == 0);
}

TEST_CASE("bound update: turn rules") {
  const auto L = list_from_keys({10.0});
  const auto member = [](std::uint64_t) { return false; };
  // Collinear: unchanged.
  auto out = update_bound_and_turns(20.0, 0.0, L, member, BoundTurnState{10.0, 1, 1}, 3, 2, 1);
  CHECK(out.tn == 1);
  // Above pi/4: one more turn.
  out = update_bound_and_turns(20.0, kPi / 3.0, L, member, BoundTurnState{10.0, 1, 1}, 3, 2, 1);
  CHECK(out.tn == 2);
  // Above pi/2: killed outright.
  out = update_bound_and_turns(20.0, 2.0 * kPi / 3.0, L, member, BoundTurnState{10.0, 0, 1}, 3, 2,
                               1);
  CHECK(out.tn == 3);
}

TEST_CASE("bound update: exhausted cursor saturates at 1 with a diagnostic") {
  const auto L = list_from_keys({10.0, 8.0});
  const std::set<std::uint64_t> path{1, 2};
  const auto member = [&path](std::uint64_t e) { return path.count(e) != 0; };
  std::int64_t saturations = 0;
  const auto out = update_bound_and_turns(1.0, 0.0, L, member, BoundTurnState{18.0, 0, 2}, 3,
                                          /*k=*/3, /*len_before=*/2, &saturations);
  CHECK(out.cur == 1);
  CHECK(out.ub_d == doctest::Approx(18.0));
  CHECK(saturations == 1);
}

TEST_CASE("bound update equals the rescan bound on random below-cursor sequences") {
  std::uint64_t state = 999;
  const auto rnd = [&state](std::uint64_t m) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (state >> 33) % m;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const int list_size = 5 + static_cast<int>(rnd(10));
    std::set<int, std::greater<int>> keyset;
    while (static_cast<int>(keyset.size()) < list_size) {
      keyset.insert(static_cast<int>(rnd(4000)) + 10);
    }
    std::vector<double> keys(keyset.begin(), keyset.end());
    const auto L = list_from_keys(keys);
    const int k = 2 + static_cast<int>(rnd(5));

    std::vector<std::pair<std::uint64_t, double>> oracle_list;
    for (std::size_t i = 0; i < keys.size(); ++i) oracle_list.push_back({i + 1, keys[i]});

    // Seed: random in-list rank or off-list key.
    std::vector<std::uint64_t> path;
    std::vector<double> path_keys;
    BoundTurnState st{0.0, 0, 0};
    if (rnd(2) == 0) {
      const std::size_t rank = 1 + rnd(static_cast<std::uint64_t>(list_size));
      const auto sb = seed_bound(L, rank, L.key_at(rank), k);
      path.push_back(L.edge_at(rank));
      path_keys.push_back(L.key_at(rank));
      st = {sb.ub_d, 0, sb.cur};
    } else {
      const double key = static_cast<double>(rnd(4000)) + 5.5;
      const auto sb = seed_bound(L, std::nullopt, key, k);
      path.push_back(1000000 + trial);
      path_keys.push_back(key);
      st = {sb.ub_d, 0, sb.cur};
    }
    REQUIRE(st.ub_d ==
            doctest::Approx(testsupport::rescan_bound_oracle(oracle_list, path, path_keys, k)));

    const auto member = [&path](std::uint64_t e) {
      return std::find(path.begin(), path.end(), e) != path.end();
    };
    for (int len = 1; len < k; ++len) {
      if (st.cur < 1) break;
      const double ceiling = L.key_at(static_cast<std::size_t>(st.cur));
      // Choose an appended edge with key strictly below L(cur): an unused
      // in-list edge when one qualifies, otherwise an off-list key.
      std::uint64_t edge = 0;
      double key = -1.0;
      for (std::size_t r = 1; r <= L.size(); ++r) {
        if (L.key_at(r) < ceiling && !member(L.edge_at(r)) && rnd(2) == 0) {
          edge = L.edge_at(r);
          key = L.key_at(r);
          break;
        }
      }
      if (key < 0.0) {
        key = std::max(0.0, ceiling - 1.0 - static_cast<double>(rnd(5)));
        edge = 2000000 + static_cast<std::uint64_t>(trial) * 100 + len;
      }
      if (!(key < ceiling)) break;
      st = update_bound_and_turns(key, 0.0, L, member, st, 5, k,
                                  static_cast<int>(path.size()));
      path.push_back(edge);
      path_keys.push_back(key);
      const double rescan = testsupport::rescan_bound_oracle(oracle_list, path, path_keys, k);
      CHECK(st.ub_d == rescan);  // integer keys: exact equality
    }
  }
}

TEST_CASE("domination table semantics") {
  DominationTable dt;
  CHECK(dt.admit(1, 2, 0.5));   // absent key admits
  CHECK(!dt.admit(1, 2, 0.4));  // dominated
  CHECK(dt.admit(1, 2, 0.6));   // strictly better updates
  CHECK(!dt.admit(1, 2, 0.6));  // equal is dominated
  CHECK(dt.admit(2, 1, 0.1));   // ordered key: reverse pair is distinct
}

TEST_CASE("feasibility: stop and road-vertex circle-freedom with loop closure") {
  PlannerConfig cfg;
  cfg.k = 6;
  cfg.tn_max = 10;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(3, 3, 21, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);

  const auto edge_between = [&](std::int32_t a, std::int32_t b) {
    const auto it = inputs.edge_by_pair.find(pack_stop_pair(a, b));
    REQUIRE(it != inputs.edge_by_pair.end());
    return it->second;
  };
  // Stop grid indices: stop_index of vid(r,c) equals r*3+c for the 3x3 grid.
  // Straight run along the bottom row.
  std::vector<std::int32_t> stops{0, 1, 2};
  std::vector<std::int32_t> edges{edge_between(0, 1), edge_between(1, 2)};
  CHECK(feasibility_check(inputs, edges, stops, cfg.k, cfg.tn_max));

  // Revisiting an interior stop is rejected.
  std::vector<std::int32_t> bad_stops{0, 1, 2, 1};
  std::vector<std::int32_t> bad_edges{edge_between(0, 1), edge_between(1, 2), edge_between(1, 2)};
  CHECK(!feasibility_check(inputs, bad_edges, bad_stops, cfg.k, cfg.tn_max));

  // A closed square 0-1-4-3-0 is a legal one-way loop.
  std::vector<std::int32_t> loop_stops{0, 1, 4, 3, 0};
  std::vector<std::int32_t> loop_edges{edge_between(0, 1), edge_between(1, 4), edge_between(4, 3),
                                       edge_between(3, 0)};
  CHECK(feasibility_check(inputs, loop_edges, loop_stops, cfg.k, cfg.tn_max));

  // Edge-count cap.
  CHECK(!feasibility_check(inputs, loop_edges, loop_stops, 3, cfg.tn_max));

  // Turn budget: the loop has four right-angle corners counted at interior
  // junctions (three of them), so tn = 3 requires Tn > 3.
  CHECK(!feasibility_check(inputs, loop_edges, loop_stops, cfg.k, 3));
  CHECK(feasibility_check(inputs, loop_edges, loop_stops, cfg.k, 4));
}

TEST_CASE("single feasible candidate with k = 1 is returned and the queue drains") {
  // 2x2 grid with a vertical route on column 0: the only candidate link is
  // the column-1 rung. Pure-connectivity weight makes it the clear winner.
  PlannerConfig cfg;
  cfg.k = 1;
  cfg.sn = 10;
  cfg.w = 0.0;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  synth::GridCityConfig gc;
  gc.rows = 2;
  gc.cols = 2;
  gc.trajectories = 0;
  gc.seed = 9;
  auto city = synth::make_grid_city(gc);
  auto cands = generate_candidate_edges(city.road, city.transit, cfg.tau_m);
  const auto A = city.transit.adjacency_matrix();
  compute_connectivity_increments(A, cands, cfg.spectral, true);
  auto existing = annotate_existing_edges(city.road, city.transit);
  REQUIRE(cands.size() == 1);

  const auto inputs = build_planner_inputs(city.road, city.transit, cands, existing, cfg);
  const auto res = run_eta(inputs, cfg);
  CHECK(res.route.edges.size() == 1);
  CHECK(res.new_edges.size() == 1);
  // Pre mode: the top seed's bound equals its own objective, so the first pop
  // already certifies optimality.
  CHECK(res.termination == Termination::kBound);
  CHECK(res.objective > 0.0);

  // Online mode: the path-bound cap stays above the incumbent, every seed is
  // popped, k = 1 forbids expansion, and the queue drains.
  PlannerConfig online = cfg;
  online.mode = Mode::kOnline;
  const auto oinputs = build_planner_inputs(city.road, city.transit, cands, existing, online);
  const auto ores = run_eta(oinputs, online);
  CHECK(ores.route.edges.size() == 1);
  CHECK(ores.new_edges.size() == 1);
  CHECK(ores.termination == Termination::kQueueExhausted);
}

TEST_CASE("empty candidate set is an error") {
  PlannerConfig cfg;
  cfg.exact_connectivity = true;
  synth::GridCityConfig gc;
  gc.rows = 2;
  gc.cols = 2;
  gc.trajectories = 10;
  auto city = synth::make_grid_city(gc);
  std::vector<CandidateEdge> none;
  std::vector<CandidateEdge> exist;  // empty universe entirely
  CHECK_THROWS_AS(build_planner_inputs(city.road, city.transit, none, exist, cfg), ConfigError);
}

TEST_CASE("pre-mode incremental objective matches a fresh recomputation") {
  PlannerConfig cfg;
  cfg.k = 4;
  cfg.sn = 100;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(4, 4, 31, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);
  const auto res = run_eta(inputs, cfg);
  REQUIRE(!res.route.edges.empty());
  double fresh = 0.0;
  for (std::int32_t id : res.route.edges) {
    fresh += inputs.edges[static_cast<std::size_t>(id)].le;
  }
  CHECK(std::abs(res.objective - fresh) <= 1e-9);
}

TEST_CASE("toy instance: ETA-Pre beats the best seed and tracks the enumeration oracle") {
  PlannerConfig cfg;
  cfg.k = 3;
  cfg.sn = 500;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(3, 4, 77, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);
  const auto res = run_eta(inputs, cfg);

  double best_seed = 0.0;
  for (const auto& e : inputs.edges) best_seed = std::max(best_seed, e.le);
  CHECK(res.objective >= best_seed - 1e-12);

  const auto oracle = testsupport::enumerate_best_route(inputs, cfg.k, cfg.tn_max);
  CHECK(res.objective <= oracle.objective + 1e-9);
  CHECK(oracle.feasible_routes > 0);
  MESSAGE("optimality ratio: ", res.objective / oracle.objective);
}

TEST_CASE("objective trace is non-decreasing") {
  PlannerConfig cfg;
  cfg.k = 4;
  cfg.sn = 50;
  cfg.record_every = 1;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(4, 4, 13, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);
  const auto res = run_eta(inputs, cfg);
  REQUIRE(res.trace.size() >= 2);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    CHECK(res.trace[i].objective >= res.trace[i - 1].objective);
  }
}

TEST_CASE("determinism: identical config and seed reproduce the result") {
  PlannerConfig cfg;
  cfg.k = 4;
  cfg.sn = 60;
  cfg.mode = Mode::kOnline;
  cfg.spectral.seed = 421;
  const auto inst = make_instance(3, 4, 55, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);
  const auto a = run_eta(inputs, cfg);
  const auto b = run_eta(inputs, cfg);
  CHECK(a.objective == b.objective);
  CHECK(a.route.stops == b.route.stops);
  CHECK(a.iterations == b.iterations);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("all-neighbors with domination off explores a superset of best-neighbor routes") {
  // Instance chosen so neither search prunes: uniform edge keys keep every
  // upper bound above the incumbent (no route can reach k = 12 edges), the
  // turn budget never binds, and domination is off. Both searches then run to
  // queue exhaustion and the all-neighbors scan is structurally exhaustive.
  PlannerConfig base;
  base.k = 12;
  base.w = 1.0;
  base.tn_max = 99;
  base.sn = 500;
  base.it_max = 1000000;
  base.mode = Mode::kPre;
  base.exact_connectivity = true;
  base.domination = false;
  auto inst = make_instance(3, 3, 8, base);
  for (auto& c : inst.candidates) c.demand = 1.0;
  for (auto& c : inst.existing) c.demand = 1.0;
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, base);

  std::set<std::string> best_seen, all_seen;
  PathObserver best_obs = [&](const std::vector<std::int32_t>& stops, double) {
    best_seen.insert(canonical_route(stops));
  };
  PathObserver all_obs = [&](const std::vector<std::int32_t>& stops, double) {
    all_seen.insert(canonical_route(stops));
  };

  PlannerConfig bn = base;
  bn.neighbors = NeighborPolicy::kBest;
  const auto rb = run_eta(inputs, bn, &best_obs);
  PlannerConfig an = base;
  an.neighbors = NeighborPolicy::kAll;
  const auto ra = run_eta(inputs, an, &all_obs);

  CHECK(rb.termination == Termination::kQueueExhausted);
  CHECK(ra.termination == Termination::kQueueExhausted);
  CHECK(all_seen.size() >= best_seen.size());
  for (const auto& r : best_seen) {
    CHECK_MESSAGE(all_seen.count(r) == 1, "missing route ", r);
  }
  CHECK(ra.objective >= rb.objective - 1e-12);
}

TEST_CASE("vk-TSP restricts the route to new edges") {
  PlannerConfig cfg;
  cfg.k = 4;
  cfg.sn = 100;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(4, 4, 42, cfg);
  const auto res = run_vk_tsp(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);
  REQUIRE(!res.route.edges.empty());
  CHECK(res.new_edges.size() == res.route.edges.size());
}

TEST_CASE("vk-TSP equals ETA at w = 1 on a network with no existing edges") {
  // Stops without any routes: the universes coincide.
  PlannerConfig cfg;
  cfg.k = 3;
  cfg.sn = 100;
  cfg.w = 1.0;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  auto city = synth::make_grid_city({3, 3, 400.0, 3, 150, 6, {40.70, -74.01}});
  TransitNetwork bare;
  for (const auto& s : city.transit.stops()) bare.add_stop(s);
  auto cands = generate_candidate_edges(city.road, bare, cfg.tau_m);
  const auto A = bare.adjacency_matrix();
  compute_connectivity_increments(A, cands, cfg.spectral, true);
  std::vector<CandidateEdge> exist;  // none

  const auto inputs = build_planner_inputs(city.road, bare, cands, exist, cfg);
  const auto eta = run_eta(inputs, cfg);
  const auto vk = run_vk_tsp(city.road, bare, cands, exist, cfg);
  CHECK(eta.objective == doctest::Approx(vk.objective).epsilon(1e-12));
  CHECK(canonical_route(eta.route.stops) == canonical_route(vk.route.stops));
}

TEST_CASE("vk-TSP demand matches the exhaustive new-edge-path enumeration") {
  PlannerConfig cfg;
  cfg.k = 3;
  cfg.sn = 500;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(3, 4, 61, cfg, 300);
  const auto res = run_vk_tsp(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);

  PlannerConfig vk = cfg;
  vk.w = 1.0;
  vk.new_edges_only = true;
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, vk);
  const auto oracle =
      testsupport::enumerate_best_route(inputs, vk.k, vk.tn_max, /*new_edges_only=*/true);
  CHECK(res.objective <= oracle.objective + 1e-9);
  CHECK(res.objective > 0.0);
  MESSAGE("vk optimality ratio: ", res.objective / oracle.objective);
  // With w = 1 the objective is pure normalized demand.
  CHECK(res.objective == doctest::Approx(res.demand_raw / inputs.norm.d_max).epsilon(1e-12));
}

TEST_CASE("multi-route: exhausting the candidate pool returns partial results with a marker") {
  // One candidate only: round 2 has no new edges left and the connectivity
  // normalizer vanishes, so planning stops with the first route and an error.
  PlannerConfig cfg;
  cfg.k = 2;
  cfg.sn = 20;
  cfg.w = 0.0;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  synth::GridCityConfig gc;
  gc.rows = 2;
  gc.cols = 2;
  gc.trajectories = 0;
  gc.seed = 5;
  auto city = synth::make_grid_city(gc);
  auto cands = generate_candidate_edges(city.road, city.transit, cfg.tau_m);
  REQUIRE(cands.size() == 1);
  const auto A = city.transit.adjacency_matrix();
  compute_connectivity_increments(A, cands, cfg.spectral, true);
  auto existing = annotate_existing_edges(city.road, city.transit);

  const auto multi = plan_multi_route(city.road, city.transit, cands, existing, cfg, 3);
  CHECK(multi.routes.size() == 1);
  CHECK(!multi.error.empty());
}

TEST_CASE("multi-route: the second route reuses no new edge and sees zeroed demand") {
  PlannerConfig cfg;
  cfg.k = 3;
  cfg.sn = 200;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(4, 5, 23, cfg, 400);

  const auto multi = plan_multi_route(inst.city.road, inst.city.transit, inst.candidates,
                                      inst.existing, cfg, 2);
  REQUIRE(multi.error.empty());
  REQUIRE(multi.routes.size() == 2);

  std::set<std::pair<StopId, StopId>> first(multi.routes[0].new_edges.begin(),
                                            multi.routes[0].new_edges.end());
  for (const auto& e : multi.routes[1].new_edges) {
    CHECK(first.count(e) == 0);
  }

  // Single-route planning is byte-for-byte the first round.
  const auto single = plan_multi_route(inst.city.road, inst.city.transit, inst.candidates,
                                       inst.existing, cfg, 1);
  REQUIRE(single.routes.size() == 1);
  CHECK(single.routes[0].objective == multi.routes[0].objective);
  CHECK(single.routes[0].route.stops == multi.routes[0].route.stops);

  // Recompute route 2's demand on a road copy with route 1's coverage zeroed.
  RoadNetwork road = inst.city.road;
  const auto inputs0 = build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates,
                                            inst.existing, cfg);
  for (std::int32_t eid : multi.routes[0].route.edges) {
    const auto& pe = inputs0.edges[static_cast<std::size_t>(eid)];
    for (std::size_t i = 1; i < pe.road_path.size(); ++i) {
      const auto a = road.index_of(pe.road_path[i - 1]);
      const auto b = road.index_of(pe.road_path[i]);
      if (auto idx = road.find_edge(a, b)) road.zero_demand(*idx);
    }
  }
  double expected_demand = 0.0;
  // Route 2's stop ids map back to edges of the augmented network; its demand
  // must reflect the zeroed road coverage.
  const auto& r2 = multi.routes[1];
  for (std::size_t i = 0; i + 1 < r2.route.stops.size(); ++i) {
    const Stop& sa = inst.city.transit.stop(r2.route.stops[i]);
    const Stop& sb = inst.city.transit.stop(r2.route.stops[i + 1]);
    const auto sp = road.shortest_path(sa.road_vertex, sb.road_vertex);
    expected_demand += road.path_demand(sp.vertices);
  }
  CHECK(r2.demand_raw == doctest::Approx(expected_demand).epsilon(1e-9));
}

TEST_CASE("termination reasons cover the three contracts") {
  PlannerConfig cfg;
  cfg.k = 3;
  cfg.sn = 100;
  cfg.mode = Mode::kPre;
  cfg.exact_connectivity = true;
  const auto inst = make_instance(4, 4, 91, cfg);
  const auto inputs =
      build_planner_inputs(inst.city.road, inst.city.transit, inst.candidates, inst.existing, cfg);

  PlannerConfig capped = cfg;
  capped.it_max = 1;
  CHECK(run_eta(inputs, capped).termination == Termination::kIterationCap);

  const auto res = run_eta(inputs, cfg);
  CHECK((res.termination == Termination::kBound || res.termination == Termination::kQueueExhausted));
}
