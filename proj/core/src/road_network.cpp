#include "buslink/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "buslink/errors.hpp"

namespace buslink {

std::int32_t RoadNetwork::add_vertex(RoadVertexId id, GeoPoint p) {
  auto it = index_map_.find(id);
  if (it != index_map_.end()) {
    points_[static_cast<std::size_t>(it->second)] = p;
    return it->second;
  }
  const auto idx = static_cast<std::int32_t>(ids_.size());
  ids_.push_back(id);
  points_.push_back(p);
  adjacency_.emplace_back();
  index_map_.emplace(id, idx);
  return idx;
}

std::int32_t RoadNetwork::index_of(RoadVertexId id) const {
  auto it = index_map_.find(id);
  if (it == index_map_.end()) {
    throw IntegrityError("road network: unknown vertex id " + std::to_string(id));
  }
  return it->second;
}

void RoadNetwork::add_edge(RoadVertexId a, RoadVertexId b, double length_m) {
  if (a == b) return;  // self loops carry no routing information
  if (!(length_m > 0.0)) {
    throw IntegrityError("road network: non-positive edge length between " + std::to_string(a) +
                         " and " + std::to_string(b));
  }
  std::int32_t u = index_of(a);
  std::int32_t v = index_of(b);
  if (u > v) std::swap(u, v);
  if (auto existing = find_edge(u, v)) {
    auto& e = edges_[static_cast<std::size_t>(*existing)];
    e.length_m = std::min(e.length_m, length_m);
    return;
  }
  const auto eidx = static_cast<std::int32_t>(edges_.size());
  edges_.push_back(RoadEdge{u, v, length_m, 0});
  adjacency_[static_cast<std::size_t>(u)].emplace_back(v, eidx);
  adjacency_[static_cast<std::size_t>(v)].emplace_back(u, eidx);
}

std::optional<std::int32_t> RoadNetwork::find_edge(std::int32_t a, std::int32_t b) const {
  const auto& adj = adjacency_[static_cast<std::size_t>(a)];
  for (const auto& [nbr, eidx] : adj) {
    if (nbr == b) return eidx;
  }
  return std::nullopt;
}

void RoadNetwork::add_demand(std::int32_t edge_idx, std::int64_t count) {
  edges_[static_cast<std::size_t>(edge_idx)].demand += count;
}

void RoadNetwork::zero_demand(std::int32_t edge_idx) {
  edges_[static_cast<std::size_t>(edge_idx)].demand = 0;
}

void RoadNetwork::reset_demand() {
  for (auto& e : edges_) e.demand = 0;
}

ShortestPath RoadNetwork::shortest_path(RoadVertexId from, RoadVertexId to) const {
  const std::int32_t s = index_of(from);
  const std::int32_t t = index_of(to);
  if (s == t) return ShortestPath{{from}, 0.0};

  // Dijkstra from the target; the forward walk from the source then picks the
  // smallest next vertex id among optimal continuations, which yields the
  // lexicographically smallest shortest path.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(vertex_count(), inf);
  std::vector<char> settled(vertex_count(), 0);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(t)] = 0.0;
  heap.emplace(0.0, t);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    if (u == s) break;
    for (const auto& [v, eidx] : adjacency_[static_cast<std::size_t>(u)]) {
      const double nd = d + edges_[static_cast<std::size_t>(eidx)].length_m;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  if (dist[static_cast<std::size_t>(s)] == inf) {
    throw NoPathError("no road path between " + std::to_string(from) + " and " +
                      std::to_string(to));
  }

  ShortestPath result;
  result.length_m = dist[static_cast<std::size_t>(s)];
  std::int32_t cur = s;
  result.vertices.push_back(id_of(cur));
  while (cur != t) {
    std::int32_t best = -1;
    RoadVertexId best_id = 0;
    const double dcur = dist[static_cast<std::size_t>(cur)];
    for (const auto& [v, eidx] : adjacency_[static_cast<std::size_t>(cur)]) {
      const double w = edges_[static_cast<std::size_t>(eidx)].length_m;
      if (dist[static_cast<std::size_t>(v)] + w == dcur) {
        const RoadVertexId vid = id_of(v);
        if (best < 0 || vid < best_id) {
          best = v;
          best_id = vid;
        }
      }
    }
    if (best < 0) throw NoPathError("shortest path reconstruction failed");
    cur = best;
    result.vertices.push_back(id_of(cur));
  }
  return result;
}

double RoadNetwork::path_demand(const std::vector<RoadVertexId>& path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const std::int32_t a = index_of(path[i - 1]);
    const std::int32_t b = index_of(path[i]);
    const auto eidx = find_edge(a, b);
    if (!eidx) {
      throw IntegrityError("path traverses non-adjacent vertices " + std::to_string(path[i - 1]) +
                           " -> " + std::to_string(path[i]));
    }
    const auto& e = edges_[static_cast<std::size_t>(*eidx)];
    total += static_cast<double>(e.demand) * e.length_m;
  }
  return total;
}

double RoadNetwork::path_length(const std::vector<RoadVertexId>& path) const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const std::int32_t a = index_of(path[i - 1]);
    const std::int32_t b = index_of(path[i]);
    const auto eidx = find_edge(a, b);
    if (!eidx) {
      throw IntegrityError("path traverses non-adjacent vertices " + std::to_string(path[i - 1]) +
                           " -> " + std::to_string(path[i]));
    }
    total += edges_[static_cast<std::size_t>(*eidx)].length_m;
  }
  return total;
}

}  // namespace buslink
