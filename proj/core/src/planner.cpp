#include "buslink/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_set>

#include "buslink/errors.hpp"
#include "buslink/geo.hpp"

namespace buslink {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTurnKill = kPi / 2.0;
constexpr double kTurnCount = kPi / 4.0;

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kBound: return "bound";
    case Termination::kIterationCap: return "iteration_cap";
    case Termination::kQueueExhausted: return "queue_exhausted";
  }
  return "unknown";
}

void validate(const PlannerConfig& config) {
  if (config.k < 1) throw ConfigError("k must be >= 1");
  if (config.w < 0.0 || config.w > 1.0) throw ConfigError("w must lie in [0, 1]");
  if (config.tn_max < 0) throw ConfigError("tn must be >= 0");
  if (config.sn < 1) throw ConfigError("sn must be >= 1");
  if (config.it_max < 1) throw ConfigError("itmax must be >= 1");
  if (config.record_every < 1) throw ConfigError("record_every must be >= 1");
  if (config.tau_m <= 0.0) throw ConfigError("tau must be positive");
  if (config.spectral.probes < 1) throw ConfigError("spectral probes must be >= 1");
  if (config.spectral.lanczos_steps < 1) throw ConfigError("lanczos steps must be >= 1");
  if (!(config.spectral.epsilon > 0.0 && config.spectral.epsilon < 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1)");
  }
}

double combine_objective(double w, double demand_term, double connectivity_term) {
  return w * demand_term + (1.0 - w) * connectivity_term;
}

SeedBound seed_bound(const RankedEdgeList& list, std::optional<std::size_t> rank1, double key,
                     int k) {
  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(k), list.size());
  if (m == 0) throw ConfigError("seed_bound: empty ranked list");
  if (rank1 && *rank1 <= m) return SeedBound{list.top_sum(m), static_cast<int>(m)};
  if (list.size() < static_cast<std::size_t>(k)) {
    // List shorter than the edge budget: nothing gets displaced.
    return SeedBound{list.top_sum(list.size()) + key, static_cast<int>(list.size())};
  }
  return SeedBound{list.top_sum(m) - (list.key_at(m) - key), static_cast<int>(m) - 1};
}

BoundTurnState update_bound_and_turns(double edge_key, double deviation_rad,
                                      const RankedEdgeList& list,
                                      const std::function<bool(std::uint64_t)>& in_path,
                                      BoundTurnState state, int tn_max, int k, int len_before,
                                      std::int64_t* cursor_saturations) {
  BoundTurnState out = state;

  // Largest still-free list slot at or below the cursor.
  int p = std::min(out.cur, static_cast<int>(list.size()));
  while (p >= 1 && in_path && in_path(list.edge_at(static_cast<std::size_t>(p)))) --p;
  if (p < 1) {
    // Budget exhausted; keep the cursor pinned and surface the event.
    out.cur = 1;
    if (cursor_saturations) ++*cursor_saturations;
  } else {
    int free_slots = 0;
    for (int r = 1; r <= p; ++r) {
      if (!in_path || !in_path(list.edge_at(static_cast<std::size_t>(r)))) ++free_slots;
    }
    const int needed_after = k - len_before - 1;
    if (free_slots > needed_after) {
      // Saturated budget: the appended edge replaces the smallest free slot.
      if (list.key_at(static_cast<std::size_t>(p)) > edge_key) {
        out.ub_d -= list.key_at(static_cast<std::size_t>(p)) - edge_key;
        out.cur = p - 1;
      } else {
        out.cur = p;
      }
    } else {
      // Every remaining slot is still needed; the edge adds on top.
      out.ub_d += edge_key;
      out.cur = p;
    }
  }

  if (deviation_rad > kTurnKill) {
    out.tn = tn_max;
  } else if (deviation_rad > kTurnCount) {
    out.tn += 1;
  }
  return out;
}

double rescan_bound(const RankedEdgeList& list, const std::vector<std::uint64_t>& path_edges,
                    const std::vector<double>& path_keys, int k) {
  double own = 0.0;
  for (double v : path_keys) own += v;
  const auto len = static_cast<int>(path_keys.size());
  if (len >= k) return own;
  std::unordered_set<std::uint64_t> in_path(path_edges.begin(), path_edges.end());
  int remaining = k - len;
  double completion = 0.0;
  for (std::size_t r = 1; r <= list.size() && remaining > 0; ++r) {
    if (in_path.count(list.edge_at(r))) continue;
    completion += list.key_at(r);
    --remaining;
  }
  return own + completion;
}

bool DominationTable::admit(std::int32_t begin_edge, std::int32_t end_edge, double objective) {
  const std::uint64_t key =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(begin_edge)) << 32) |
      static_cast<std::uint32_t>(end_edge);
  auto it = best_.find(key);
  if (it == best_.end()) {
    best_.emplace(key, objective);
    return true;
  }
  if (objective > it->second) {
    it->second = objective;
    return true;
  }
  return false;
}

namespace {

/// Road vertices of an edge oriented to start at the given junction stop.
void append_oriented_path(const PlannerEdge& e, std::int32_t junction_stop,
                          std::vector<RoadVertexId>& out, bool skip_first) {
  const bool forward = junction_stop == e.a;
  const auto& p = e.road_path;
  if (p.empty()) return;
  if (forward) {
    for (std::size_t i = skip_first ? 1 : 0; i < p.size(); ++i) out.push_back(p[i]);
  } else {
    for (std::size_t i = skip_first ? 1 : 0; i < p.size(); ++i) out.push_back(p[p.size() - 1 - i]);
  }
}

struct StructureCheck {
  bool ok = false;
  int turns = 0;
  bool killed = false;  // some deviation exceeded pi/2
};

StructureCheck check_structure(const PlannerInputs& inputs,
                               const std::vector<std::int32_t>& edge_ids,
                               const std::vector<std::int32_t>& stop_seq) {
  StructureCheck res;
  if (edge_ids.empty() || stop_seq.size() != edge_ids.size() + 1) return res;

  // Every edge crossed at most once.
  std::unordered_set<std::int32_t> eset(edge_ids.begin(), edge_ids.end());
  if (eset.size() != edge_ids.size()) return res;

  const bool closed = stop_seq.front() == stop_seq.back() && stop_seq.size() > 2;
  {
    std::unordered_set<std::int32_t> seen;
    const std::size_t upto = closed ? stop_seq.size() - 1 : stop_seq.size();
    for (std::size_t i = 0; i < upto; ++i) {
      if (!seen.insert(stop_seq[i]).second) return res;
    }
    if (!closed && stop_seq.size() > 1 && stop_seq.front() == stop_seq.back()) return res;
  }

  // Turn census over interior junctions (the closing junction of a loop is
  // the turnaround and is not counted).
  const auto& transit = *inputs.transit;
  for (std::size_t i = 1; i + 1 < stop_seq.size(); ++i) {
    const double dev =
        turn_deviation_rad(transit.stop(stop_seq[i - 1]).pos, transit.stop(stop_seq[i]).pos,
                           transit.stop(stop_seq[i + 1]).pos);
    if (dev > kTurnKill) res.killed = true;
    if (dev > kTurnCount) ++res.turns;
  }

  // Circle-free over the concatenated road-vertex sequence.
  std::vector<RoadVertexId> road_seq;
  for (std::size_t i = 0; i < edge_ids.size(); ++i) {
    const PlannerEdge& e = inputs.edges[static_cast<std::size_t>(edge_ids[i])];
    append_oriented_path(e, stop_seq[i], road_seq, /*skip_first=*/i > 0);
  }
  if (!road_seq.empty()) {
    const bool road_closed = closed && road_seq.front() == road_seq.back();
    std::unordered_set<RoadVertexId> seen;
    const std::size_t upto = road_closed ? road_seq.size() - 1 : road_seq.size();
    for (std::size_t i = 0; i < upto; ++i) {
      if (!seen.insert(road_seq[i]).second) return res;
    }
    if (!road_closed && road_seq.size() > 1 && road_seq.front() == road_seq.back()) return res;
  }

  res.ok = true;
  return res;
}

}  // namespace

bool feasibility_check(const PlannerInputs& inputs, const std::vector<std::int32_t>& edge_ids,
                       const std::vector<std::int32_t>& stop_seq, int k, int tn_max) {
  if (edge_ids.empty()) return false;
  if (static_cast<int>(edge_ids.size()) > k) return false;
  const StructureCheck sc = check_structure(inputs, edge_ids, stop_seq);
  if (!sc.ok || sc.killed) return false;
  return sc.turns < tn_max;
}

PlannerInputs build_planner_inputs(const RoadNetwork& road, const TransitNetwork& transit,
                                   const std::vector<CandidateEdge>& candidates,
                                   const std::vector<CandidateEdge>& existing,
                                   const PlannerConfig& config) {
  validate(config);
  PlannerInputs in;
  in.road = &road;
  in.transit = &transit;
  in.A = transit.adjacency_matrix();

  in.demand_list = make_demand_list(candidates);
  in.delta_list = make_delta_list(candidates);
  in.norm = compute_normalizers(in.demand_list, in.delta_list, config.k);
  in.integrated_list = make_integrated_list(candidates, existing, config.w, in.norm);

  std::vector<const CandidateEdge*> merged;
  merged.reserve(candidates.size() + existing.size());
  for (const auto& c : candidates) merged.push_back(&c);
  for (const auto& c : existing) merged.push_back(&c);
  std::sort(merged.begin(), merged.end(), [](const CandidateEdge* x, const CandidateEdge* y) {
    return pack_stop_pair(x->stop_a, x->stop_b) < pack_stop_pair(y->stop_a, y->stop_b);
  });

  in.edges.reserve(merged.size());
  in.stop_edges.assign(transit.stop_count(), {});
  for (const CandidateEdge* c : merged) {
    PlannerEdge e;
    e.id = static_cast<std::int32_t>(in.edges.size());
    e.a = std::min(c->stop_a, c->stop_b);
    e.b = std::max(c->stop_a, c->stop_b);
    e.is_new = c->is_new;
    e.demand = c->demand;
    e.delta = c->is_new ? c->delta : 0.0;
    e.length_m = c->length_m;
    e.road_path = c->road_path;
    const std::uint64_t pair = pack_stop_pair(e.a, e.b);
    e.le = in.integrated_list.key_of(pair).value_or(0.0);
    in.edge_by_pair.emplace(pair, e.id);
    in.stop_edges[static_cast<std::size_t>(e.a)].emplace_back(e.b, e.id);
    in.stop_edges[static_cast<std::size_t>(e.b)].emplace_back(e.a, e.id);
    in.edges.push_back(std::move(e));
  }
  for (auto& adj : in.stop_edges) {
    std::sort(adj.begin(), adj.end(),
              [](const auto& x, const auto& y) { return x.second < y.second; });
  }

  if (config.mode == Mode::kOnline) {
    in.lambda_base = config.exact_connectivity ? spectral::natural_connectivity_exact(in.A)
                                               : spectral::natural_connectivity(in.A, config.spectral);
    const auto n = static_cast<std::int64_t>(transit.stop_count());
    const int k_eff = static_cast<int>(std::min<std::int64_t>(config.k, n - 1));
    if (k_eff >= 1) {
      const int need = (k_eff + 1) / 2;
      const std::vector<double> top = spectral::top_eigenvalues(in.A, need);
      in.ub_lambda = spectral::path_upper_bound(in.lambda_base, top, k_eff, n) - in.lambda_base;
    }
  }
  return in;
}

namespace {

struct PathState {
  std::vector<std::int32_t> edges;
  std::vector<std::int32_t> stops;
  double objective = 0.0;
  double demand_sum = 0.0;
  double delta_sum = 0.0;  // sum of new-edge deltas (pre-mode connectivity term)
  double conn_raw = 0.0;   // online: lambda(cp) - lambda_base
  double ub = 0.0;
  double ub_d = 0.0;
  int tn = 0;
  int cur = 0;
};

struct QueueItem {
  double ub = 0.0;
  std::uint64_t seq = 0;
  std::uint32_t idx = 0;
  bool operator<(const QueueItem& o) const {
    if (ub != o.ub) return ub < o.ub;
    return seq > o.seq;  // earlier insertions pop first on ties
  }
};

struct Extension {
  std::int32_t edge_id = -1;
  bool at_begin = false;
  std::int32_t far_stop = -1;
  double objective = -std::numeric_limits<double>::infinity();
  double conn_raw = 0.0;
};

class Search {
 public:
  Search(const PlannerInputs& in, const PlannerConfig& cfg, const PathObserver* observer)
      : in_(in), cfg_(cfg), observer_(observer) {
    active_list_ = cfg_.mode == Mode::kPre ? &in_.integrated_list : &in_.demand_list;
  }

  PlanResult run();

 private:
  double edge_key(const PlannerEdge& e) const {
    return cfg_.mode == Mode::kPre ? e.le : e.demand;
  }

  double combine_ub(double ub_d) const {
    if (cfg_.mode == Mode::kPre) return ub_d;
    const double d_term = cfg_.w > 0.0 ? cfg_.w * ub_d / in_.norm.d_max : 0.0;
    const double l_term = cfg_.w < 1.0 ? (1.0 - cfg_.w) * in_.ub_lambda / in_.norm.lambda_max : 0.0;
    return d_term + l_term;
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> new_pairs(
      const std::vector<std::int32_t>& edge_ids) const {
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for (std::int32_t id : edge_ids) {
      const PlannerEdge& e = in_.edges[static_cast<std::size_t>(id)];
      if (e.is_new) pairs.emplace_back(e.a, e.b);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
  }

  double online_conn_raw(const std::vector<std::int32_t>& edge_ids) {
    const auto pairs = new_pairs(edge_ids);
    if (pairs.empty()) return 0.0;
    ++evaluations_;
    const double lam = cfg_.exact_connectivity
                           ? spectral::natural_connectivity_exact(in_.A, pairs)
                           : spectral::natural_connectivity(in_.A, pairs, cfg_.spectral);
    return lam - in_.lambda_base;
  }

  /// Objective of a state whose demand_sum/delta_sum are filled; returns the
  /// connectivity increment it used through conn_raw.
  double objective_of(const std::vector<std::int32_t>& edge_ids, double demand_sum,
                      double delta_sum, double* conn_raw) {
    if (cfg_.mode == Mode::kPre) {
      if (conn_raw) *conn_raw = delta_sum;
      const double d_term = cfg_.w > 0.0 ? cfg_.w * demand_sum / in_.norm.d_max : 0.0;
      const double l_term =
          cfg_.w < 1.0 ? (1.0 - cfg_.w) * delta_sum / in_.norm.lambda_max : 0.0;
      return d_term + l_term;
    }
    double raw = 0.0;
    if (cfg_.w < 1.0) raw = online_conn_raw(edge_ids);
    if (conn_raw) *conn_raw = raw;
    const double d_term = cfg_.w > 0.0 ? cfg_.w * demand_sum / in_.norm.d_max : 0.0;
    const double l_term = cfg_.w < 1.0 ? (1.0 - cfg_.w) * raw / in_.norm.lambda_max : 0.0;
    return d_term + l_term;
  }

  bool edge_allowed(const PlannerEdge& e) const { return !cfg_.new_edges_only || e.is_new; }

  /// Structural admissibility of appending edge `eid` at one end; far stop and
  /// loop closure are reported. Road-vertex collisions are checked against
  /// road_set (the closing vertex is exempt for a closure).
  bool can_append(const PathState& s, std::int32_t eid, bool at_begin,
                  const std::unordered_set<RoadVertexId>& road_set, std::int32_t* far_out,
                  bool* closes_out) const {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(eid)];
    const std::int32_t junction = at_begin ? s.stops.front() : s.stops.back();
    const std::int32_t far = e.a == junction ? e.b : e.a;
    const std::int32_t opposite = at_begin ? s.stops.back() : s.stops.front();
    const bool closes = far == opposite && s.edges.size() + 1 >= 3;
    if (!closes) {
      for (std::int32_t st : s.stops) {
        if (st == far) return false;
      }
    }
    // Oriented road path from the junction; skip the shared junction vertex.
    const bool forward = e.a == junction;
    const auto& p = e.road_path;
    const RoadVertexId closing_vertex =
        closes ? (at_begin ? road_back_vertex(s) : road_front_vertex(s)) : RoadVertexId{-1};
    for (std::size_t i = 1; i < p.size(); ++i) {
      const RoadVertexId v = forward ? p[i] : p[p.size() - 1 - i];
      const bool last = i + 1 == p.size();
      if (closes && last && v == closing_vertex) continue;
      if (road_set.count(v)) return false;
    }
    if (far_out) *far_out = far;
    if (closes_out) *closes_out = closes;
    return true;
  }

  RoadVertexId road_front_vertex(const PathState& s) const {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(s.edges.front())];
    if (e.road_path.empty()) return -1;
    return e.a == s.stops.front() ? e.road_path.front() : e.road_path.back();
  }
  RoadVertexId road_back_vertex(const PathState& s) const {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(s.edges.back())];
    if (e.road_path.empty()) return -1;
    return e.b == s.stops.back() ? e.road_path.back() : e.road_path.front();
  }

  std::unordered_set<RoadVertexId> road_vertex_set(const PathState& s) const {
    std::unordered_set<RoadVertexId> set;
    for (std::size_t i = 0; i < s.edges.size(); ++i) {
      const PlannerEdge& e = in_.edges[static_cast<std::size_t>(s.edges[i])];
      append_oriented_set(e, set);
    }
    return set;
  }
  static void append_oriented_set(const PlannerEdge& e, std::unordered_set<RoadVertexId>& set) {
    for (RoadVertexId v : e.road_path) set.insert(v);
  }

  PathState extend(const PathState& s, std::int32_t eid, bool at_begin, std::int32_t far) const {
    PathState t;
    t.edges = s.edges;
    t.stops = s.stops;
    if (at_begin) {
      t.edges.insert(t.edges.begin(), eid);
      t.stops.insert(t.stops.begin(), far);
    } else {
      t.edges.push_back(eid);
      t.stops.push_back(far);
    }
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(eid)];
    t.demand_sum = s.demand_sum + e.demand;
    t.delta_sum = s.delta_sum + (e.is_new ? e.delta : 0.0);
    t.tn = s.tn;
    t.cur = s.cur;
    t.ub = s.ub;
    t.ub_d = s.ub_d;
    return t;
  }

  double append_deviation(const PathState& s, bool at_begin, std::int32_t far) const {
    const auto& transit = *in_.transit;
    if (at_begin) {
      return turn_deviation_rad(transit.stop(far).pos, transit.stop(s.stops.front()).pos,
                                transit.stop(s.stops[1]).pos);
    }
    return turn_deviation_rad(transit.stop(s.stops[s.stops.size() - 2]).pos,
                              transit.stop(s.stops.back()).pos, transit.stop(far).pos);
  }

  void maybe_update_incumbent(const PathState& s);
  void further_expansion(PathState s, double inherited_ub, int inherited_tn,
                         const std::vector<std::pair<std::int32_t, double>>& appended);
  void record_trace(std::int64_t iteration);

  const PlannerInputs& in_;
  const PlannerConfig& cfg_;
  const PathObserver* observer_ = nullptr;
  const RankedEdgeList* active_list_ = nullptr;

  std::vector<PathState> arena_;
  std::priority_queue<QueueItem> queue_;
  std::uint64_t push_seq_ = 0;
  DominationTable domination_;

  PathState best_;
  bool has_best_ = false;
  double best_objective_ = 0.0;

  std::vector<TracePoint> trace_;
  std::int64_t evaluations_ = 0;
  std::int64_t cursor_saturations_ = 0;
  std::int64_t bound_violations_ = 0;

  friend PlanResult finalize(Search&, Termination, std::int64_t);
};

void Search::maybe_update_incumbent(const PathState& s) {
  if (!feasibility_check(in_, s.edges, s.stops, cfg_.k, cfg_.tn_max)) return;
  if (!has_best_ || s.objective > best_objective_) {
    best_ = s;
    has_best_ = true;
    best_objective_ = s.objective;
  }
}

void Search::further_expansion(PathState s, double inherited_ub, int inherited_tn,
                               const std::vector<std::pair<std::int32_t, double>>& appended) {
  if (!(inherited_tn < cfg_.tn_max)) return;
  if (!(inherited_ub > best_objective_)) return;
  if (!(static_cast<int>(s.edges.size()) < cfg_.k)) return;

  std::unordered_set<std::uint64_t> in_path;
  for (std::int32_t id : s.edges) {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(id)];
    in_path.insert(pack_stop_pair(e.a, e.b));
  }
  const auto member = [&in_path](std::uint64_t key) { return in_path.count(key) != 0; };

  BoundTurnState bt{s.ub_d, s.tn, s.cur};
  int len_before = static_cast<int>(s.edges.size() - appended.size());
  for (const auto& [eid, angle] : appended) {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(eid)];
    bt = update_bound_and_turns(edge_key(e), angle, *active_list_, member, bt, cfg_.tn_max,
                                cfg_.k, len_before, &cursor_saturations_);
    ++len_before;
  }
  s.ub_d = bt.ub_d;
  s.tn = bt.tn;
  s.cur = bt.cur;
  s.ub = combine_ub(s.ub_d);

  if (cfg_.domination) {
    const std::int32_t be = s.edges.front();
    const std::int32_t ee = s.edges.back();
    if (!domination_.admit(be, ee, s.objective)) return;
  }
  arena_.push_back(std::move(s));
  queue_.push(QueueItem{arena_.back().ub, push_seq_++,
                        static_cast<std::uint32_t>(arena_.size() - 1)});
}

void Search::record_trace(std::int64_t iteration) {
  TracePoint p;
  p.iteration = iteration;
  p.objective = has_best_ ? best_objective_ : 0.0;
  if (has_best_) {
    p.demand_term = in_.norm.d_max > 0.0 ? best_.demand_sum / in_.norm.d_max : 0.0;
    p.connectivity_term = in_.norm.lambda_max > 0.0 ? best_.conn_raw / in_.norm.lambda_max : 0.0;
  }
  trace_.push_back(p);
}

PlanResult finalize(Search& search, Termination reason, std::int64_t iterations) {
  const PlannerInputs& in = search.in_;
  PlanResult result;
  result.termination = reason;
  result.iterations = iterations;
  result.trace = std::move(search.trace_);
  result.evaluations = search.evaluations_;
  result.cursor_saturations = search.cursor_saturations_;
  result.bound_violations = search.bound_violations_;
  if (search.has_best_) {
    result.route.edges = search.best_.edges;
    result.route.stops = search.best_.stops;
    for (std::int32_t id : search.best_.edges) {
      const PlannerEdge& e = in.edges[static_cast<std::size_t>(id)];
      if (e.is_new) {
        result.new_edges.emplace_back(in.transit->stop(e.a).id, in.transit->stop(e.b).id);
      }
    }
    result.objective = search.best_objective_;
    result.demand_raw = search.best_.demand_sum;
    result.connectivity_raw = search.best_.conn_raw;
    result.demand_term = in.norm.d_max > 0.0 ? search.best_.demand_sum / in.norm.d_max : 0.0;
    result.connectivity_term =
        in.norm.lambda_max > 0.0 ? search.best_.conn_raw / in.norm.lambda_max : 0.0;
  }
  return result;
}

PlanResult Search::run() {
  // Seed pool: top-sn entries of the active universe.
  std::vector<std::int32_t> pool;
  if (cfg_.mode == Mode::kPre) {
    for (std::size_t r = 1; r <= in_.integrated_list.size(); ++r) {
      const auto it = in_.edge_by_pair.find(in_.integrated_list.edge_at(r));
      if (it == in_.edge_by_pair.end()) continue;
      const PlannerEdge& e = in_.edges[static_cast<std::size_t>(it->second)];
      if (!edge_allowed(e)) continue;
      pool.push_back(e.id);
      if (pool.size() >= static_cast<std::size_t>(cfg_.sn)) break;
    }
  } else {
    std::vector<std::int32_t> ids;
    for (const PlannerEdge& e : in_.edges) {
      if (edge_allowed(e)) ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end(), [this](std::int32_t x, std::int32_t y) {
      const double dx = in_.edges[static_cast<std::size_t>(x)].demand;
      const double dy = in_.edges[static_cast<std::size_t>(y)].demand;
      if (dx != dy) return dx > dy;
      return x < y;
    });
    if (ids.size() > static_cast<std::size_t>(cfg_.sn)) {
      ids.resize(static_cast<std::size_t>(cfg_.sn));
    }
    pool = std::move(ids);
  }
  if (pool.empty()) throw ConfigError("planner: empty candidate set");

  record_trace(0);
  for (std::int32_t eid : pool) {
    const PlannerEdge& e = in_.edges[static_cast<std::size_t>(eid)];
    PathState s;
    s.edges = {eid};
    s.stops = {e.a, e.b};
    s.demand_sum = e.demand;
    s.delta_sum = e.is_new ? e.delta : 0.0;
    if (cfg_.mode == Mode::kPre) {
      s.objective = e.le;
      s.conn_raw = s.delta_sum;
    } else {
      // Delta(e) was produced by the same estimator configuration, so the
      // single-edge objective reuses it instead of re-estimating.
      const double raw = cfg_.w < 1.0 ? s.delta_sum : 0.0;
      s.conn_raw = raw;
      const double d_term = cfg_.w > 0.0 ? cfg_.w * e.demand / in_.norm.d_max : 0.0;
      const double l_term = cfg_.w < 1.0 ? (1.0 - cfg_.w) * raw / in_.norm.lambda_max : 0.0;
      s.objective = d_term + l_term;
    }
    maybe_update_incumbent(s);

    const std::uint64_t pair = pack_stop_pair(e.a, e.b);
    const SeedBound sb = seed_bound(*active_list_, active_list_->rank_of(pair), edge_key(e), cfg_.k);
    s.cur = sb.cur;
    s.ub_d = sb.ub_d;
    s.ub = combine_ub(sb.ub_d);
    s.tn = 0;
    arena_.push_back(std::move(s));
    queue_.push(QueueItem{arena_.back().ub, push_seq_++,
                          static_cast<std::uint32_t>(arena_.size() - 1)});
  }

  std::int64_t it = 0;
  Termination reason = Termination::kQueueExhausted;
  while (true) {
    if (queue_.empty()) {
      reason = Termination::kQueueExhausted;
      break;
    }
    const QueueItem item = queue_.top();
    queue_.pop();
    const PathState state = arena_[item.idx];
    if (cfg_.mode == Mode::kPre && item.ub < state.objective - 1e-9) ++bound_violations_;
    if (!(item.ub > best_objective_)) {
      reason = Termination::kBound;
      break;
    }
    if (it >= cfg_.it_max) {
      reason = Termination::kIterationCap;
      break;
    }
    ++it;

    const bool closed = state.stops.front() == state.stops.back() && state.stops.size() > 2;
    if (!closed && static_cast<int>(state.edges.size()) < cfg_.k) {
      const auto road_set = road_vertex_set(state);
      std::unordered_set<std::int32_t> used(state.edges.begin(), state.edges.end());

      Extension best_begin, best_end;
      for (int side = 0; side < 2; ++side) {
        const bool at_begin = side == 0;
        const std::int32_t end_stop = at_begin ? state.stops.front() : state.stops.back();
        Extension& best = at_begin ? best_begin : best_end;
        for (const auto& [nbr, eid] : in_.stop_edges[static_cast<std::size_t>(end_stop)]) {
          (void)nbr;
          const PlannerEdge& e = in_.edges[static_cast<std::size_t>(eid)];
          if (!edge_allowed(e)) continue;
          if (used.count(eid)) continue;
          std::int32_t far = -1;
          bool closes = false;
          if (!can_append(state, eid, at_begin, road_set, &far, &closes)) continue;

          PathState p = extend(state, eid, at_begin, far);
          double conn_raw = 0.0;
          p.objective = objective_of(p.edges, p.demand_sum, p.delta_sum, &conn_raw);
          p.conn_raw = conn_raw;

          if (observer_ && *observer_) (*observer_)(p.stops, p.objective);
          if (cfg_.neighbors == NeighborPolicy::kAll) {
            maybe_update_incumbent(p);
            const double dev = append_deviation(state, at_begin, far);
            further_expansion(std::move(p), state.ub, state.tn, {{eid, dev}});
          } else if (p.objective > best.objective ||
                     (p.objective == best.objective && best.edge_id >= 0 && eid < best.edge_id)) {
            best.edge_id = eid;
            best.at_begin = at_begin;
            best.far_stop = far;
            best.objective = p.objective;
            best.conn_raw = p.conn_raw;
          }
        }
      }

      if (cfg_.neighbors == NeighborPolicy::kBest && (best_begin.edge_id >= 0 || best_end.edge_id >= 0)) {
        // Compose be + cp + ee; fall back to the better single extension when
        // the double append is structurally impossible or exceeds k edges.
        PathState composed;
        std::vector<std::pair<std::int32_t, double>> appended;
        bool have = false;
        if (best_begin.edge_id >= 0 && best_end.edge_id >= 0 &&
            best_begin.edge_id != best_end.edge_id &&
            static_cast<int>(state.edges.size()) + 2 <= cfg_.k) {
          PathState t = extend(state, best_begin.edge_id, true, best_begin.far_stop);
          const double dev_begin = append_deviation(state, true, best_begin.far_stop);
          // Validate the second append against the grown path.
          const auto road_set2 = road_vertex_set(t);
          std::int32_t far2 = -1;
          bool closes2 = false;
          if (can_append(t, best_end.edge_id, false, road_set2, &far2, &closes2) &&
              far2 == best_end.far_stop) {
            const double dev_end = append_deviation(t, false, far2);
            PathState u = extend(t, best_end.edge_id, false, far2);
            double conn_raw = 0.0;
            u.objective = objective_of(u.edges, u.demand_sum, u.delta_sum, &conn_raw);
            u.conn_raw = conn_raw;
            composed = std::move(u);
            appended = {{best_begin.edge_id, dev_begin}, {best_end.edge_id, dev_end}};
            have = true;
          }
        }
        if (!have) {
          const Extension* pick = nullptr;
          if (best_begin.edge_id >= 0 && best_end.edge_id >= 0) {
            if (best_begin.objective != best_end.objective) {
              pick = best_begin.objective > best_end.objective ? &best_begin : &best_end;
            } else {
              pick = best_begin.edge_id <= best_end.edge_id ? &best_begin : &best_end;
            }
          } else {
            pick = best_begin.edge_id >= 0 ? &best_begin : &best_end;
          }
          PathState t = extend(state, pick->edge_id, pick->at_begin, pick->far_stop);
          const double dev = append_deviation(state, pick->at_begin, pick->far_stop);
          t.objective = pick->objective;
          t.conn_raw = pick->conn_raw;
          composed = std::move(t);
          appended = {{pick->edge_id, dev}};
          have = true;
        }
        if (observer_ && *observer_) (*observer_)(composed.stops, composed.objective);
        maybe_update_incumbent(composed);
        further_expansion(std::move(composed), state.ub, state.tn, appended);
      }
    }

    if (it % cfg_.record_every == 0) record_trace(it);
  }

  record_trace(it);
  return finalize(*this, reason, it);
}

}  // namespace

PlanResult run_eta(const PlannerInputs& inputs, const PlannerConfig& config,
                   const PathObserver* observer) {
  validate(config);
  Search search(inputs, config, observer);
  return search.run();
}

PlanResult run_vk_tsp(const RoadNetwork& road, const TransitNetwork& transit,
                      const std::vector<CandidateEdge>& candidates,
                      const std::vector<CandidateEdge>& existing, const PlannerConfig& config) {
  PlannerConfig vk = config;
  vk.w = 1.0;
  vk.new_edges_only = true;
  const PlannerInputs inputs = build_planner_inputs(road, transit, candidates, existing, vk);
  return run_eta(inputs, vk);
}

MultiPlanOutcome plan_multi_route(const RoadNetwork& road, const TransitNetwork& transit,
                                  const std::vector<CandidateEdge>& candidates,
                                  const std::vector<CandidateEdge>& existing,
                                  const PlannerConfig& config, int count) {
  if (count < 1) throw ConfigError("plan_multi_route: count must be >= 1");
  MultiPlanOutcome out;
  RoadNetwork road_copy = road;
  TransitNetwork transit_copy = transit;
  std::vector<CandidateEdge> cand = candidates;
  std::vector<CandidateEdge> exist = existing;

  for (int round = 0; round < count; ++round) {
    PlannerInputs inputs;
    PlanResult result;
    try {
      inputs = build_planner_inputs(road_copy, transit_copy, cand, exist, config);
      result = run_eta(inputs, config);
    } catch (const std::exception& e) {
      out.error = e.what();
      return out;
    }
    if (result.route.edges.empty()) {
      out.error = "no feasible route in round " + std::to_string(round + 1);
      return out;
    }
    out.routes.push_back(result);
    if (round + 1 == count) break;

    // Covered road edges lose their demand; planned new edges join the network.
    for (std::int32_t eid : result.route.edges) {
      const PlannerEdge& e = inputs.edges[static_cast<std::size_t>(eid)];
      for (std::size_t i = 1; i < e.road_path.size(); ++i) {
        const auto a = road_copy.index_of(e.road_path[i - 1]);
        const auto b = road_copy.index_of(e.road_path[i]);
        if (auto idx = road_copy.find_edge(a, b)) road_copy.zero_demand(*idx);
      }
    }
    std::vector<std::uint64_t> planned;
    for (std::int32_t eid : result.route.edges) {
      const PlannerEdge& e = inputs.edges[static_cast<std::size_t>(eid)];
      if (!e.is_new) continue;
      transit_copy.add_edge(e.a, e.b);
      planned.push_back(pack_stop_pair(e.a, e.b));
    }
    std::vector<CandidateEdge> still_new;
    still_new.reserve(cand.size());
    for (auto& c : cand) {
      const std::uint64_t pair = pack_stop_pair(c.stop_a, c.stop_b);
      if (std::find(planned.begin(), planned.end(), pair) != planned.end()) {
        CandidateEdge moved = c;
        moved.is_new = false;
        moved.delta = 0.0;
        exist.push_back(std::move(moved));
        continue;
      }
      still_new.push_back(std::move(c));
    }
    cand = std::move(still_new);
    for (auto& c : cand) c.demand = road_copy.path_demand(c.road_path);
    for (auto& c : exist) {
      try {
        c.demand = road_copy.path_demand(c.road_path);
      } catch (const IntegrityError&) {
        c.demand = 0.0;  // straight-segment fallback path has no road edges
      }
    }
  }
  return out;
}

}  // namespace buslink
