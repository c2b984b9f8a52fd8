#include "buslink/candidates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "buslink/errors.hpp"
#include "buslink/geo.hpp"

namespace buslink {

namespace {

/// Runs fn(i) for i in [0, count) across `threads` workers. Each index writes
/// only its own output slot, so results are schedule-independent.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  const int nthreads = static_cast<int>(std::min<std::size_t>(count, threads));
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

void fill_road_path(const RoadNetwork& road, const TransitNetwork& transit, CandidateEdge& e,
                    bool* unreachable) {
  const Stop& sa = transit.stop(e.stop_a);
  const Stop& sb = transit.stop(e.stop_b);
  try {
    ShortestPath sp = road.shortest_path(sa.road_vertex, sb.road_vertex);
    e.road_path = std::move(sp.vertices);
    e.length_m = sp.length_m;
    e.demand = road.path_demand(e.road_path);
    if (unreachable) *unreachable = false;
  } catch (const NoPathError&) {
    if (unreachable) *unreachable = true;
  }
}

}  // namespace

std::vector<CandidateEdge> generate_candidate_edges(const RoadNetwork& road,
                                                    const TransitNetwork& transit, double tau_m,
                                                    CandidateGenStats* stats, int threads) {
  const auto n = static_cast<std::int32_t>(transit.stop_count());

  // Coarse lat/lng grid so only nearby stop pairs get a haversine check.
  const double cell_lat = std::max(tau_m / 111000.0, 1e-9);
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> grid;
  const auto cell_key = [&](GeoPoint p) -> std::pair<std::int64_t, std::int64_t> {
    const double lat_rad = p.lat * 3.14159265358979323846 / 180.0;
    const double cell_lng = cell_lat / std::max(0.2, std::cos(lat_rad));
    return {static_cast<std::int64_t>(std::floor(p.lat / cell_lat)),
            static_cast<std::int64_t>(std::floor(p.lng / cell_lng))};
  };
  const auto pack_cell = [](std::int64_t r, std::int64_t c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) |
           static_cast<std::uint32_t>(c);
  };
  for (std::int32_t i = 0; i < n; ++i) {
    const auto [r, c] = cell_key(transit.stop(i).pos);
    grid[pack_cell(r, c)].push_back(i);
  }

  std::vector<CandidateEdge> result;
  for (std::int32_t i = 0; i < n; ++i) {
    const GeoPoint pi = transit.stop(i).pos;
    const auto [r, c] = cell_key(pi);
    for (std::int64_t dr = -1; dr <= 1; ++dr) {
      for (std::int64_t dc = -1; dc <= 1; ++dc) {
        auto it = grid.find(pack_cell(r + dr, c + dc));
        if (it == grid.end()) continue;
        for (std::int32_t j : it->second) {
          if (j <= i) continue;
          if (haversine_m(pi, transit.stop(j).pos) > tau_m) continue;
          if (transit.has_edge(i, j)) continue;
          CandidateEdge e;
          e.stop_a = i;
          e.stop_b = j;
          e.is_new = true;
          result.push_back(std::move(e));
        }
      }
    }
  }
  std::sort(result.begin(), result.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
    return pack_stop_pair(a.stop_a, a.stop_b) < pack_stop_pair(b.stop_a, b.stop_b);
  });
  if (stats) stats->pairs_within_tau = result.size();

  std::vector<char> unreachable(result.size(), 0);
  parallel_for(result.size(), threads, [&](std::size_t idx) {
    bool miss = false;
    fill_road_path(road, transit, result[idx], &miss);
    unreachable[idx] = miss ? 1 : 0;
  });

  std::vector<CandidateEdge> kept;
  kept.reserve(result.size());
  std::size_t dropped = 0;
  for (std::size_t idx = 0; idx < result.size(); ++idx) {
    if (unreachable[idx]) {
      ++dropped;
      continue;
    }
    kept.push_back(std::move(result[idx]));
  }
  if (stats) stats->unreachable_dropped = dropped;
  return kept;
}

std::vector<CandidateEdge> annotate_existing_edges(const RoadNetwork& road,
                                                   const TransitNetwork& transit, int threads) {
  std::vector<CandidateEdge> result;
  result.reserve(transit.edge_count());
  for (const auto& te : transit.edges()) {
    CandidateEdge e;
    e.stop_a = te.a;
    e.stop_b = te.b;
    e.is_new = false;
    e.delta = 0.0;
    result.push_back(std::move(e));
  }
  std::sort(result.begin(), result.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
    return pack_stop_pair(a.stop_a, a.stop_b) < pack_stop_pair(b.stop_a, b.stop_b);
  });
  parallel_for(result.size(), threads, [&](std::size_t idx) {
    CandidateEdge& e = result[idx];
    bool miss = false;
    fill_road_path(road, transit, e, &miss);
    if (miss) {
      // Edge stays in the network; fall back to the straight segment so route
      // geometry and feasibility checks still have endpoints to work with.
      const Stop& sa = transit.stop(e.stop_a);
      const Stop& sb = transit.stop(e.stop_b);
      e.road_path = sa.road_vertex == sb.road_vertex
                        ? std::vector<RoadVertexId>{sa.road_vertex}
                        : std::vector<RoadVertexId>{sa.road_vertex, sb.road_vertex};
      e.length_m = haversine_m(sa.pos, sb.pos);
      e.demand = 0.0;
    }
  });
  return result;
}

double connectivity_increment(const Eigen::SparseMatrix<double>& A,
                              std::pair<std::int32_t, std::int32_t> e,
                              const spectral::SpectralParams& params, bool exact) {
  if (A.coeff(e.first, e.second) != 0.0) {
    throw ConfigError("connectivity_increment: edge already present in the network");
  }
  if (exact) {
    return spectral::natural_connectivity_exact(A, {e}) - spectral::natural_connectivity_exact(A);
  }
  return spectral::natural_connectivity(A, {e}, params) - spectral::natural_connectivity(A, params);
}

void compute_connectivity_increments(const Eigen::SparseMatrix<double>& A,
                                     std::vector<CandidateEdge>& candidates,
                                     const spectral::SpectralParams& params, bool exact,
                                     int threads) {
  const double base = exact ? spectral::natural_connectivity_exact(A)
                            : spectral::natural_connectivity(A, params);
  parallel_for(candidates.size(), threads, [&](std::size_t idx) {
    CandidateEdge& e = candidates[idx];
    if (!e.is_new) {
      e.delta = 0.0;
      return;
    }
    const std::pair<std::int32_t, std::int32_t> edge{e.stop_a, e.stop_b};
    const double with_edge = exact ? spectral::natural_connectivity_exact(A, {edge})
                                   : spectral::natural_connectivity(A, {edge}, params);
    e.delta = with_edge - base;
  });
}

RankedEdgeList::RankedEdgeList(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.edge < b.edge;
  });
  rank_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) rank_.emplace(entries_[i].edge, i);
}

double RankedEdgeList::key_at(std::size_t rank1) const {
  if (rank1 < 1 || rank1 > entries_.size()) {
    throw ConfigError("RankedEdgeList: rank " + std::to_string(rank1) + " out of range");
  }
  return entries_[rank1 - 1].key;
}

std::uint64_t RankedEdgeList::edge_at(std::size_t rank1) const {
  if (rank1 < 1 || rank1 > entries_.size()) {
    throw ConfigError("RankedEdgeList: rank " + std::to_string(rank1) + " out of range");
  }
  return entries_[rank1 - 1].edge;
}

std::optional<std::size_t> RankedEdgeList::rank_of(std::uint64_t edge) const {
  auto it = rank_.find(edge);
  if (it == rank_.end()) return std::nullopt;
  return it->second + 1;
}

std::optional<double> RankedEdgeList::key_of(std::uint64_t edge) const {
  auto it = rank_.find(edge);
  if (it == rank_.end()) return std::nullopt;
  return entries_[it->second].key;
}

double RankedEdgeList::top_sum(std::size_t count) const {
  double acc = 0.0;
  const std::size_t m = std::min(count, entries_.size());
  for (std::size_t i = 0; i < m; ++i) acc += entries_[i].key;
  return acc;
}

RankedEdgeList make_demand_list(const std::vector<CandidateEdge>& candidates) {
  std::vector<RankedEdgeList::Entry> entries;
  entries.reserve(candidates.size());
  for (const auto& c : candidates) {
    entries.push_back({pack_stop_pair(c.stop_a, c.stop_b), c.demand});
  }
  return RankedEdgeList(std::move(entries));
}

RankedEdgeList make_delta_list(const std::vector<CandidateEdge>& candidates) {
  std::vector<RankedEdgeList::Entry> entries;
  entries.reserve(candidates.size());
  for (const auto& c : candidates) {
    entries.push_back({pack_stop_pair(c.stop_a, c.stop_b), c.delta});
  }
  return RankedEdgeList(std::move(entries));
}

Normalizers compute_normalizers(const RankedEdgeList& demand, const RankedEdgeList& delta,
                                int k) {
  if (k < 1) throw ConfigError("compute_normalizers: k must be >= 1");
  Normalizers n;
  n.d_max = demand.top_sum(static_cast<std::size_t>(k));
  n.lambda_max = delta.top_sum(static_cast<std::size_t>(k));
  return n;
}

RankedEdgeList make_integrated_list(const std::vector<CandidateEdge>& candidates,
                                    const std::vector<CandidateEdge>& existing, double w,
                                    const Normalizers& norm) {
  if (w > 0.0 && !(norm.d_max > 0.0)) {
    throw ConfigError("integrated list: demand normalizer is zero with positive demand weight");
  }
  if (w < 1.0 && !(norm.lambda_max > 0.0)) {
    throw ConfigError(
        "integrated list: connectivity normalizer is zero with positive connectivity weight");
  }
  const auto key = [&](const CandidateEdge& c) {
    const double d_term = w > 0.0 ? w * c.demand / norm.d_max : 0.0;
    const double l_term = w < 1.0 ? (1.0 - w) * c.delta / norm.lambda_max : 0.0;
    return d_term + l_term;
  };
  std::vector<RankedEdgeList::Entry> entries;
  entries.reserve(candidates.size() + existing.size());
  for (const auto& c : candidates) entries.push_back({pack_stop_pair(c.stop_a, c.stop_b), key(c)});
  for (const auto& c : existing) entries.push_back({pack_stop_pair(c.stop_a, c.stop_b), key(c)});
  return RankedEdgeList(std::move(entries));
}

RankedLists build_ranked_lists(const std::vector<CandidateEdge>& candidates,
                               const std::vector<CandidateEdge>& existing, double w,
                               const Normalizers& norm) {
  RankedLists lists;
  lists.demand = make_demand_list(candidates);
  lists.delta = make_delta_list(candidates);
  lists.integrated = make_integrated_list(candidates, existing, w, norm);
  return lists;
}

GreedyTopK greedy_topk_edges(const std::vector<CandidateEdge>& candidates, int k, bool recompute,
                             const Eigen::SparseMatrix<double>* A,
                             const spectral::SpectralParams* params, bool exact) {
  if (k < 1) throw ConfigError("greedy_topk_edges: k must be >= 1");
  GreedyTopK out;
  if (!recompute) {
    std::vector<const CandidateEdge*> sorted;
    sorted.reserve(candidates.size());
    for (const auto& c : candidates) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const CandidateEdge* a, const CandidateEdge* b) {
      if (a->delta != b->delta) return a->delta > b->delta;
      return pack_stop_pair(a->stop_a, a->stop_b) < pack_stop_pair(b->stop_a, b->stop_b);
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size());
    for (std::size_t i = 0; i < take; ++i) {
      out.edges.emplace_back(sorted[i]->stop_a, sorted[i]->stop_b);
    }
    out.truncated = take < static_cast<std::size_t>(k);
    return out;
  }

  if (!A || !params) throw ConfigError("greedy_topk_edges: recompute mode needs A and params");
  std::vector<std::pair<std::int32_t, std::int32_t>> chosen;
  std::vector<char> used(candidates.size(), 0);
  for (int round = 0; round < k; ++round) {
    double best_gain = -1.0;
    std::size_t best_idx = candidates.size();
    const double base = exact ? spectral::natural_connectivity_exact(*A, chosen)
                              : spectral::natural_connectivity(*A, chosen, *params);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      auto with = chosen;
      with.emplace_back(candidates[i].stop_a, candidates[i].stop_b);
      const double val = exact ? spectral::natural_connectivity_exact(*A, with)
                               : spectral::natural_connectivity(*A, with, *params);
      const double gain = val - base;
      if (gain > best_gain) {
        best_gain = gain;
        best_idx = i;
      }
    }
    if (best_idx == candidates.size()) break;
    used[best_idx] = 1;
    chosen.emplace_back(candidates[best_idx].stop_a, candidates[best_idx].stop_b);
  }
  out.edges = std::move(chosen);
  out.truncated = static_cast<int>(out.edges.size()) < k;
  return out;
}

}  // namespace buslink
