#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "buslink/candidates.hpp"
#include "buslink/spectral.hpp"
#include "buslink/transit_network.hpp"

namespace buslink {

enum class Mode { kOnline, kPre };
enum class NeighborPolicy { kBest, kAll };
enum class Termination { kBound, kIterationCap, kQueueExhausted };

const char* to_string(Termination t);

struct PlannerConfig {
  int k = 30;
  double w = 0.5;
  double tau_m = 500.0;
  int tn_max = 3;
  int sn = 5000;
  std::int64_t it_max = 100000;
  Mode mode = Mode::kPre;
  NeighborPolicy neighbors = NeighborPolicy::kBest;
  bool domination = true;
  spectral::SpectralParams spectral;
  bool exact_connectivity = false;  // dense oracle instead of the estimator (small n)
  int record_every = 100;
  int threads = 1;
  bool new_edges_only = false;  // vk-TSP universe restriction
};

void validate(const PlannerConfig& config);  // throws ConfigError

/// Unified edge universe entry: existing transit edges and candidate links.
struct PlannerEdge {
  std::int32_t id = 0;
  std::int32_t a = 0;  // stop indices, a < b
  std::int32_t b = 0;
  bool is_new = true;
  double demand = 0.0;
  double delta = 0.0;
  double le = 0.0;  // integrated objective increment
  double length_m = 0.0;
  std::vector<RoadVertexId> road_path;  // oriented a -> b
};

struct PlannerInputs {
  const RoadNetwork* road = nullptr;
  const TransitNetwork* transit = nullptr;
  Eigen::SparseMatrix<double> A;
  double lambda_base = 0.0;  // online mode only
  double ub_lambda = 0.0;    // path-bound cap on the connectivity increment (online)
  std::vector<PlannerEdge> edges;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> stop_edges;  // (stop, edge id)
  std::unordered_map<std::uint64_t, std::int32_t> edge_by_pair;
  RankedEdgeList demand_list;      // L_d over new edges
  RankedEdgeList delta_list;       // L_lambda over new edges
  RankedEdgeList integrated_list;  // L_e over new + existing edges
  Normalizers norm;
};

PlannerInputs build_planner_inputs(const RoadNetwork& road, const TransitNetwork& transit,
                                   const std::vector<CandidateEdge>& candidates,
                                   const std::vector<CandidateEdge>& existing,
                                   const PlannerConfig& config);

/// Initialization bound for a seed edge: rank <= min(k, |L|) keeps the full
/// top-k sum with cur there; an off-list seed swaps itself against the k-th
/// slot (or adds on top when the list is shorter than k).
struct SeedBound {
  double ub_d = 0.0;
  int cur = 0;
};
SeedBound seed_bound(const RankedEdgeList& list, std::optional<std::size_t> rank1, double key,
                     int k);

struct BoundTurnState {
  double ub_d = 0.0;
  int tn = 0;
  int cur = 0;
};

/// Incremental demand-bound and turn update for one appended edge. While the
/// budget is saturated (enough free list slots at or below the cursor to fill
/// the path to k edges) the appended edge swaps against the smallest free
/// slot, skipping slots the path already owns; when the list runs short the
/// edge simply adds on top. Either way the value equals the full rescan bound
/// for below-cursor appends. Turn rule: deviation > pi/2 kills the path
/// (tn = tn_max), deviation > pi/4 counts one turn.
BoundTurnState update_bound_and_turns(double edge_key, double deviation_rad,
                                      const RankedEdgeList& list,
                                      const std::function<bool(std::uint64_t)>& in_path,
                                      BoundTurnState state, int tn_max, int k, int len_before,
                                      std::int64_t* cursor_saturations = nullptr);

/// Full reference bound: path's own keys plus the top (k - len) still-free
/// list entries.
double rescan_bound(const RankedEdgeList& list, const std::vector<std::uint64_t>& path_edges,
                    const std::vector<double>& path_keys, int k);

/// Circle-free in stops (first = last allowed as a closing loop) and in the
/// concatenated underlying road-vertex sequence, with the turn budget and the
/// edge-count cap.
bool feasibility_check(const PlannerInputs& inputs, const std::vector<std::int32_t>& edge_ids,
                       const std::vector<std::int32_t>& stop_seq, int k, int tn_max);

/// Memo keyed by (begin edge, end edge) suppressing dominated re-expansions.
class DominationTable {
 public:
  /// True (and records the value) iff objective strictly improves the key.
  bool admit(std::int32_t begin_edge, std::int32_t end_edge, double objective);
  std::size_t size() const { return best_.size(); }

 private:
  std::unordered_map<std::uint64_t, double> best_;
};

double combine_objective(double w, double demand_term, double connectivity_term);

struct TracePoint {
  std::int64_t iteration = 0;
  double objective = 0.0;
  double demand_term = 0.0;
  double connectivity_term = 0.0;
};

struct PlanResult {
  RoutePath route;  // stop indices + planner edge ids
  std::vector<std::pair<StopId, StopId>> new_edges;  // external stop ids
  double objective = 0.0;
  double demand_term = 0.0;
  double connectivity_term = 0.0;
  double demand_raw = 0.0;
  double connectivity_raw = 0.0;
  std::int64_t iterations = 0;
  Termination termination = Termination::kQueueExhausted;
  std::vector<TracePoint> trace;
  std::int64_t cursor_saturations = 0;
  std::int64_t evaluations = 0;
  std::int64_t bound_violations = 0;  // pre-mode pops with ub below the path's own objective
};

/// Called for every candidate path whose objective gets evaluated during the
/// search (diagnostics and tests).
using PathObserver = std::function<void(const std::vector<std::int32_t>& stops, double objective)>;

PlanResult run_eta(const PlannerInputs& inputs, const PlannerConfig& config,
                   const PathObserver* observer = nullptr);

/// Demand-only baseline: w forced to 1 and the edge universe restricted to
/// new candidate links.
PlanResult run_vk_tsp(const RoadNetwork& road, const TransitNetwork& transit,
                      const std::vector<CandidateEdge>& candidates,
                      const std::vector<CandidateEdge>& existing, const PlannerConfig& config);

struct MultiPlanOutcome {
  std::vector<PlanResult> routes;
  std::string error;  // set when planning stopped early; routes holds partial results
};

/// Plans `count` routes: after each route the planned new edges join the
/// network, covered road-edge demand drops to zero and demand entries are
/// rebuilt before replanning.
MultiPlanOutcome plan_multi_route(const RoadNetwork& road, const TransitNetwork& transit,
                                  const std::vector<CandidateEdge>& candidates,
                                  const std::vector<CandidateEdge>& existing,
                                  const PlannerConfig& config, int count);

}  // namespace buslink
