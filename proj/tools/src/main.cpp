// buslink: plan one new bus route over an existing transit network,
// maximizing weighted commuting demand plus natural-connectivity gain.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "buslink/candidates.hpp"
#include "buslink/errors.hpp"
#include "buslink/eval.hpp"
#include "buslink/netio.hpp"
#include "buslink/planner.hpp"
#include "buslink/spectral.hpp"
#include "buslink/synth.hpp"

namespace {

using namespace buslink;

struct Options {
  std::string road_gr;
  std::string road_co;
  std::string transit;
  std::string trajectories;
  std::string cache = "preprocess.cache.json";
  std::string out;     // geojson (plan) / metrics json (eval) / csv (experiment)
  std::string report;  // route report json: output for plan, input for eval
  std::string trace;   // objective trace csv

  PlannerConfig planner;
  std::string mode = "pre";
  std::string neighbors = "best";
  std::string domination = "on";
  std::string algo = "eta";
  std::uint64_t seed = 42;
  int routes = 1;
  bool exact = false;
  bool force = false;

  // experiment extras
  std::string experiment_kind;
  int steps = 10;
  std::string sizes = "1,2,5,10,20";
  int trials = 30;
  int instances = 50;
  int synth_n = 60;
};

PlannerConfig make_planner_config(const Options& o) {
  PlannerConfig c = o.planner;
  c.mode = o.mode == "online" ? Mode::kOnline : Mode::kPre;
  c.neighbors = o.neighbors == "all" ? NeighborPolicy::kAll : NeighborPolicy::kBest;
  c.domination = o.domination != "off";
  c.spectral.seed = o.seed;
  c.exact_connectivity = o.exact;
  validate(c);
  return c;
}

std::vector<std::string> hash_files(const Options& o) {
  std::vector<std::string> files{o.road_gr, o.road_co, o.transit};
  if (!o.trajectories.empty()) files.push_back(o.trajectories);
  return files;
}

std::vector<std::string> hash_tokens(const Options&, const PlannerConfig& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "tau=%.6f;s=%d;t=%d;seed=%llu;exact=%d", c.tau_m,
                c.spectral.probes, c.spectral.lanczos_steps,
                static_cast<unsigned long long>(c.spectral.seed), c.exact_connectivity ? 1 : 0);
  return {buf};
}

struct World {
  RoadNetwork road;
  TransitNetwork transit;
};

World load_world(const Options& o, bool need_trajectories) {
  if (o.road_gr.empty() || o.road_co.empty()) throw ConfigError("--road-gr and --road-co are required");
  if (o.transit.empty()) throw ConfigError("--transit is required");
  World w;
  w.road = io::load_road_network({o.road_gr, o.road_co});
  w.transit = io::load_transit_network(o.transit, w.road);
  if (!o.trajectories.empty()) {
    io::load_trajectories(o.trajectories, w.road);
  } else if (need_trajectories) {
    throw ConfigError("--trajectories is required for this command");
  }
  return w;
}

PrecomputeCache run_preprocess(const Options& o, const PlannerConfig& cfg, const World& w) {
  PrecomputeCache cache;
  cache.input_hash = hash_inputs(hash_files(o), hash_tokens(o, cfg));
  cache.tau_m = cfg.tau_m;
  cache.params = cfg.spectral;
  cache.exact = cfg.exact_connectivity;
  cache.candidates =
      generate_candidate_edges(w.road, w.transit, cfg.tau_m, &cache.stats, cfg.threads);
  const auto A = w.transit.adjacency_matrix();
  compute_connectivity_increments(A, cache.candidates, cfg.spectral, cfg.exact_connectivity,
                                  cfg.threads);
  cache.existing = annotate_existing_edges(w.road, w.transit, cfg.threads);
  cache.lambda_base = cfg.exact_connectivity ? spectral::natural_connectivity_exact(A)
                                             : spectral::natural_connectivity(A, cfg.spectral);
  return cache;
}

/// Candidates/existing for plan: strictly from the cache in pre mode, computed
/// on the fly (or from a matching cache) in online mode.
PrecomputeCache plan_precompute(const Options& o, const PlannerConfig& cfg, const World& w) {
  const std::string hash = hash_inputs(hash_files(o), hash_tokens(o, cfg));
  const bool cache_ok = [&] {
    try {
      return load_cache(o.cache).input_hash == hash;
    } catch (const std::exception&) {
      return false;
    }
  }();
  if (cache_ok) return load_cache(o.cache);
  if (cfg.mode == Mode::kPre) {
    throw ConfigError("pre mode requires an up-to-date preprocessing cache at '" + o.cache +
                      "'; run `buslink preprocess` first");
  }
  return run_preprocess(o, cfg, w);
}

io::RouteReport to_report(const PlanResult& r, const TransitNetwork& transit) {
  io::RouteReport rep;
  for (std::int32_t s : r.route.stops) rep.route.push_back(transit.stop(s).id);
  rep.new_edges = r.new_edges;
  rep.objective = r.objective;
  rep.demand_term = r.demand_term;
  rep.connectivity_term = r.connectivity_term;
  rep.demand_raw = r.demand_raw;
  rep.connectivity_raw = r.connectivity_raw;
  rep.termination = to_string(r.termination);
  rep.iterations = r.iterations;
  return rep;
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "iteration,best_objective,demand_term,connectivity_term\n";
  char buf[160];
  for (const auto& p : trace) {
    std::snprintf(buf, sizeof(buf), "%lld,%.12g,%.12g,%.12g\n",
                  static_cast<long long>(p.iteration), p.objective, p.demand_term,
                  p.connectivity_term);
    out += buf;
  }
  return out;
}

std::string route_geojson(const PlanResult& r, const PlannerInputs& inputs,
                          const PlannerConfig& cfg) {
  std::vector<io::RouteEdgeGeometry> geoms;
  const auto& transit = *inputs.transit;
  const auto& road = *inputs.road;
  for (std::size_t i = 0; i < r.route.edges.size(); ++i) {
    const PlannerEdge& e = inputs.edges[static_cast<std::size_t>(r.route.edges[i])];
    io::RouteEdgeGeometry g;
    const std::int32_t from_stop = r.route.stops[i];
    const std::int32_t to_stop = r.route.stops[i + 1];
    g.from = transit.stop(from_stop).id;
    g.to = transit.stop(to_stop).id;
    g.is_new = e.is_new;
    if (e.road_path.size() >= 2) {
      const bool forward = from_stop == e.a;
      for (std::size_t j = 0; j < e.road_path.size(); ++j) {
        const RoadVertexId v = forward ? e.road_path[j] : e.road_path[e.road_path.size() - 1 - j];
        g.line.push_back(road.point_by_id(v));
      }
    } else {
      g.line.push_back(transit.stop(from_stop).pos);
      g.line.push_back(transit.stop(to_stop).pos);
    }
    geoms.push_back(std::move(g));
  }
  const std::map<std::string, double> props{{"objective", r.objective},
                                            {"demand_term", r.demand_term},
                                            {"connectivity_term", r.connectivity_term},
                                            {"k", static_cast<double>(cfg.k)},
                                            {"w", cfg.w}};
  return io::make_route_geojson(geoms, props);
}

int cmd_preprocess(const Options& o) {
  const PlannerConfig cfg = make_planner_config(o);
  const std::string hash = hash_inputs(hash_files(o), hash_tokens(o, cfg));
  if (!o.force) {
    try {
      if (load_cache(o.cache).input_hash == hash) {
        std::cout << "cache up to date (" << o.cache << ")\n";
        return 0;
      }
    } catch (const std::exception&) {
      // stale or missing cache; fall through and rebuild
    }
  }
  const World w = load_world(o, /*need_trajectories=*/false);
  const PrecomputeCache cache = run_preprocess(o, cfg, w);
  save_cache(cache, o.cache);
  std::cout << "preprocessed " << cache.candidates.size() << " candidate edges ("
            << cache.stats.unreachable_dropped << " unreachable dropped), "
            << cache.existing.size() << " existing edges annotated\n"
            << "lambda_base = " << cache.lambda_base << "\n"
            << "cache written to " << o.cache << "\n";
  return 0;
}

int cmd_plan(const Options& o) {
  const PlannerConfig cfg = make_planner_config(o);
  if (o.routes < 1) throw ConfigError("--routes must be >= 1");
  const World w = load_world(o, /*need_trajectories=*/false);
  const PrecomputeCache pre = plan_precompute(o, cfg, w);

  std::vector<io::RouteReport> reports;
  std::string geojson;
  std::string trace;
  std::string error;

  if (o.algo == "vktsp") {
    const PlanResult r = run_vk_tsp(w.road, w.transit, pre.candidates, pre.existing, cfg);
    PlannerConfig vk = cfg;
    vk.w = 1.0;
    vk.new_edges_only = true;
    const PlannerInputs inputs =
        build_planner_inputs(w.road, w.transit, pre.candidates, pre.existing, vk);
    reports.push_back(to_report(r, w.transit));
    geojson = route_geojson(r, inputs, vk);
    trace = trace_csv(r.trace);
  } else if (o.routes == 1) {
    const PlannerInputs inputs =
        build_planner_inputs(w.road, w.transit, pre.candidates, pre.existing, cfg);
    const PlanResult r = run_eta(inputs, cfg);
    reports.push_back(to_report(r, w.transit));
    geojson = route_geojson(r, inputs, cfg);
    trace = trace_csv(r.trace);
  } else {
    const MultiPlanOutcome outcome =
        plan_multi_route(w.road, w.transit, pre.candidates, pre.existing, cfg, o.routes);
    error = outcome.error;
    const PlannerInputs inputs =
        build_planner_inputs(w.road, w.transit, pre.candidates, pre.existing, cfg);
    for (std::size_t i = 0; i < outcome.routes.size(); ++i) {
      reports.push_back(to_report(outcome.routes[i], w.transit));
      if (i == 0) {
        geojson = route_geojson(outcome.routes[0], inputs, cfg);
        trace = trace_csv(outcome.routes[0].trace);
      }
    }
  }

  if (!o.report.empty()) {
    io::write_text_file(o.report, reports.size() == 1 ? io::route_report_to_json(reports[0])
                                                      : io::route_reports_to_json(reports));
  }
  if (!o.out.empty() && !geojson.empty()) io::write_text_file(o.out, geojson);
  if (!o.trace.empty() && !trace.empty()) io::write_text_file(o.trace, trace);

  for (const auto& rep : reports) {
    std::cout << "objective = " << rep.objective << " (demand " << rep.demand_term
              << ", connectivity " << rep.connectivity_term << "), stops = " << rep.route.size()
              << ", new edges = " << rep.new_edges.size() << ", termination = " << rep.termination
              << "\n";
  }
  if (!error.empty()) {
    std::cerr << "multi-route planning stopped early: " << error << "\n";
    return 2;
  }
  return 0;
}

int cmd_connectivity(const Options& o) {
  if (o.transit.empty()) throw ConfigError("--transit is required");
  TransitNetwork transit;
  if (!o.road_gr.empty() && !o.road_co.empty()) {
    const RoadNetwork road = io::load_road_network({o.road_gr, o.road_co});
    transit = io::load_transit_network(o.transit, road);
  } else {
    transit = io::load_transit_network_standalone(o.transit);
  }
  double lambda = 0.0;
  if (transit.stop_count() > 0) {
    const auto A = transit.adjacency_matrix();
    spectral::SpectralParams p = make_planner_config(o).spectral;
    lambda = o.exact ? spectral::natural_connectivity_exact(A)
                     : spectral::natural_connectivity(A, p);
  }
  std::printf("lambda = %.6f\n", lambda);
  return 0;
}

int cmd_bounds(const Options& o) {
  if (o.transit.empty()) throw ConfigError("--transit is required");
  TransitNetwork transit;
  if (!o.road_gr.empty() && !o.road_co.empty()) {
    const RoadNetwork road = io::load_road_network({o.road_gr, o.road_co});
    transit = io::load_transit_network(o.transit, road);
  } else {
    transit = io::load_transit_network_standalone(o.transit);
  }
  const PlannerConfig cfg = make_planner_config(o);
  const int k = cfg.k;
  const auto A = transit.adjacency_matrix();
  const auto n = static_cast<std::int64_t>(transit.stop_count());
  if (n < 1) throw ConfigError("bounds: transit network has no stops");
  const double lambda = o.exact || n <= 2000 ? spectral::natural_connectivity_exact(A)
                                             : spectral::natural_connectivity(A, cfg.spectral);
  const std::int64_t m_edges = static_cast<std::int64_t>(transit.edge_count());
  std::printf("lambda(G) = %.6f\n", lambda);
  std::printf("estrada_bound = %.6f\n", spectral::estrada_upper_bound(m_edges, n, k));
  if (n >= 2) {
    const auto top2k =
        spectral::top_eigenvalues(A, static_cast<int>(std::min<std::int64_t>(2 * k, n)));
    std::printf("general_bound = %.6f\n", spectral::general_upper_bound(lambda, top2k, k, n));
    if (n >= k + 1) {
      const std::vector<double> top(top2k.begin(), top2k.begin() + (k + 1) / 2);
      std::printf("path_bound = %.6f\n", spectral::path_upper_bound(lambda, top, k, n));
    }
  }
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.report.empty()) throw ConfigError("eval needs --report (route report from plan)");
  const World w = load_world(o, /*need_trajectories=*/false);
  const auto reports = io::route_reports_from_file(o.report);
  if (reports.empty()) throw ConfigError("eval: empty report file");
  const io::RouteReport& rep = reports.front();
  if (rep.route.size() < 2) throw ConfigError("eval: report has no route");

  std::vector<std::int32_t> mu;
  for (StopId sid : rep.route) mu.push_back(w.transit.stop_index(sid));

  TransitNetwork augmented = w.transit;
  RouteId new_id = 1;
  for (const auto& r : w.transit.routes()) new_id = std::max(new_id, r.id + 1);
  augmented.add_route(new_id, mu);

  const auto old_lengths = eval::transit_edge_lengths(w.transit, w.road);
  const auto new_lengths = eval::transit_edge_lengths(augmented, w.road);
  const auto metrics = eval::transfer_metrics(mu, w.transit, old_lengths, augmented, new_lengths);

  std::ostringstream ss;
  ss << "{\n"
     << "  \"transfers_avoided\": " << metrics.transfers_avoided << ",\n"
     << "  \"distance_ratio\": " << metrics.distance_ratio << ",\n"
     << "  \"crossed_routes\": " << metrics.crossed_routes << ",\n"
     << "  \"pairs_evaluated\": " << metrics.pairs_evaluated << ",\n"
     << "  \"pairs_skipped\": " << metrics.pairs_skipped << "\n"
     << "}\n";
  if (!o.out.empty()) io::write_text_file(o.out, ss.str());
  std::cout << ss.str();
  return 0;
}

std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw ConfigError("experiment: empty --sizes list");
  return out;
}

int cmd_experiment(const Options& o) {
  const PlannerConfig cfg = make_planner_config(o);
  if (o.experiment_kind == "monotonicity") {
    if (o.transit.empty()) throw ConfigError("--transit is required");
    TransitNetwork transit;
    if (!o.road_gr.empty() && !o.road_co.empty()) {
      const RoadNetwork road = io::load_road_network({o.road_gr, o.road_co});
      transit = io::load_transit_network(o.transit, road);
    } else {
      transit = io::load_transit_network_standalone(o.transit);
    }
    const auto points =
        eval::monotonicity_experiment(transit, o.steps, cfg.spectral, o.exact, o.seed);
    const std::string csv = eval::monotonicity_csv(points);
    if (!o.out.empty()) io::write_text_file(o.out, csv);
    std::cout << csv;
    return 0;
  }
  if (o.experiment_kind == "submodularity") {
    const World w = load_world(o, /*need_trajectories=*/false);
    CandidateGenStats stats;
    const auto candidates =
        generate_candidate_edges(w.road, w.transit, cfg.tau_m, &stats, cfg.threads);
    if (candidates.empty()) throw ConfigError("submodularity: no candidate edges within tau");
    const auto A = w.transit.adjacency_matrix();
    const auto samples = eval::submodularity_experiment(A, candidates, parse_sizes(o.sizes),
                                                        o.trials, cfg.spectral, o.exact, o.seed);
    const std::string csv = eval::theta_csv(samples);
    if (!o.out.empty()) io::write_text_file(o.out, csv);
    std::cout << csv;
    return 0;
  }
  if (o.experiment_kind == "bounds") {
    std::vector<eval::BoundRow> rows;
    std::size_t unsound = 0;
    std::size_t path_le_general = 0;
    std::size_t general_le_estrada = 0;
    for (int i = 0; i < o.instances; ++i) {
      const auto A = synth::random_connected_adjacency(o.synth_n, 2.6, o.seed + 17 * i);
      const int k = 1 + static_cast<int>((o.seed + i) % std::max(1, cfg.k));
      const auto path = synth::sample_new_path(A, k, o.seed + 31 * i);
      if (path.empty()) continue;
      const auto row = eval::bound_tightness_row(A, path, 0.0);
      if (row.lambda_new > row.general + 1e-9 || row.lambda_new > row.path + 1e-9 ||
          row.lambda_new > row.estrada + 1e-9) {
        ++unsound;
      }
      if (row.path <= row.general) ++path_le_general;
      if (row.general <= row.estrada) ++general_le_estrada;
      rows.push_back(row);
    }
    const std::string csv = eval::bounds_csv(rows);
    if (!o.out.empty()) io::write_text_file(o.out, csv);
    std::cout << csv;
    std::cerr << "instances=" << rows.size() << " unsound=" << unsound
              << " path<=general=" << path_le_general << " general<=estrada=" << general_le_estrada
              << "\n";
    return 0;
  }
  throw ConfigError("unknown experiment '" + o.experiment_kind +
                    "' (expected monotonicity|submodularity|bounds)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"buslink: transit route planning with connectivity and demand"};
  app.set_config("--config", "", "Flat key = value configuration file");
  Options o;
  o.planner.threads = std::max(1u, std::thread::hardware_concurrency());

  const auto opt = [&](const char* name, auto& field, const char* help) {
    std::string env = "BUSLINK_";
    for (const char* p = name + 2; *p; ++p) {
      env += *p == '-' ? '_' : static_cast<char>(std::toupper(*p));
    }
    return app.add_option(name, field, help)->envname(env);
  };

  opt("--road-gr", o.road_gr, "DIMACS arc file (a u v w)");
  opt("--road-co", o.road_co, "DIMACS coordinate file (v id x y, micro-degrees)");
  opt("--transit", o.transit, "Transit network JSON (stops + routes)");
  opt("--trajectories", o.trajectories, "Trajectory file (road vertex ids per line)");
  opt("--cache", o.cache, "Preprocessing cache path");
  opt("--out", o.out, "Output path (plan: GeoJSON; eval: metrics JSON; experiment: CSV)");
  opt("--report", o.report, "Route report JSON (plan output / eval input)");
  opt("--trace", o.trace, "Objective trace CSV path");

  opt("--k", o.planner.k, "Maximum number of route edges")->check(CLI::PositiveNumber);
  opt("--w", o.planner.w, "Demand weight in [0,1]")->check(CLI::Range(0.0, 1.0));
  opt("--tau", o.planner.tau_m, "Candidate stop distance threshold in meters")
      ->check(CLI::PositiveNumber);
  opt("--tn", o.planner.tn_max, "Turn budget")->check(CLI::NonNegativeNumber);
  opt("--sn", o.planner.sn, "Seeding number")->check(CLI::PositiveNumber);
  opt("--itmax", o.planner.it_max, "Iteration cap")->check(CLI::PositiveNumber);
  opt("--mode", o.mode, "Objective evaluation mode")
      ->check(CLI::IsMember({"online", "pre"}));
  opt("--neighbors", o.neighbors, "Expansion policy")->check(CLI::IsMember({"best", "all"}));
  opt("--domination", o.domination, "Domination table")->check(CLI::IsMember({"on", "off"}));
  opt("--algo", o.algo, "Planner algorithm")->check(CLI::IsMember({"eta", "vktsp"}));
  opt("--seed", o.seed, "RNG seed");
  opt("--routes", o.routes, "Number of routes to plan sequentially")
      ->check(CLI::PositiveNumber);
  opt("--s", o.planner.spectral.probes, "Hutchinson probe count")->check(CLI::PositiveNumber);
  opt("--t", o.planner.spectral.lanczos_steps, "Lanczos iterations per probe")
      ->check(CLI::PositiveNumber);
  opt("--record-every", o.planner.record_every, "Objective trace stride")
      ->check(CLI::PositiveNumber);
  opt("--threads", o.planner.threads, "Worker threads for preprocessing")
      ->check(CLI::PositiveNumber);
  app.add_flag("--exact", o.exact, "Use the dense exact connectivity oracle (n <= 5000)")
      ->envname("BUSLINK_EXACT");

  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  auto* sub_pre = app.add_subcommand("preprocess", "Build the candidate-edge cache");
  sub_pre->add_flag("--force", o.force, "Rebuild even when the cache is up to date");
  auto* sub_plan = app.add_subcommand("plan", "Plan a new route");
  auto* sub_conn = app.add_subcommand("connectivity", "Print the network's natural connectivity");
  auto* sub_bounds = app.add_subcommand("bounds", "Print connectivity upper bounds for k added edges");
  auto* sub_eval = app.add_subcommand("eval", "Transfer-convenience metrics for a planned route");
  auto* sub_exp = app.add_subcommand("experiment", "Analysis harnesses");
  sub_exp->add_option("kind", o.experiment_kind, "monotonicity|submodularity|bounds")
      ->required();
  sub_exp->add_option("--steps", o.steps, "Monotonicity recording steps");
  sub_exp->add_option("--sizes", o.sizes, "Submodularity set sizes, comma separated");
  sub_exp->add_option("--trials", o.trials, "Trials per size");
  sub_exp->add_option("--instances", o.instances, "Bound-tightness instance count");
  sub_exp->add_option("--n", o.synth_n, "Synthetic graph size for bound instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sub_pre->parsed()) return cmd_preprocess(o);
    if (sub_plan->parsed()) return cmd_plan(o);
    if (sub_conn->parsed()) return cmd_connectivity(o);
    if (sub_bounds->parsed()) return cmd_bounds(o);
    if (sub_eval->parsed()) return cmd_eval(o);
    if (sub_exp->parsed()) return cmd_experiment(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
