#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "buslink/geo.hpp"
#include "buslink/road_network.hpp"

namespace buslink {

using StopId = std::int64_t;
using RouteId = std::int64_t;

struct Stop {
  StopId id = 0;
  RoadVertexId road_vertex = 0;
  GeoPoint pos;
};

struct TransitEdge {
  std::int32_t a = 0;  // stop indices, a < b
  std::int32_t b = 0;
  std::vector<RouteId> owners;  // sorted, unique
};

struct TransitRoute {
  RouteId id = 0;
  std::vector<std::int32_t> stops;  // stop indices
};

/// Packs an unordered stop-index pair into one key (low index in the high word).
inline std::uint64_t pack_stop_pair(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}
inline std::pair<std::int32_t, std::int32_t> unpack_stop_pair(std::uint64_t key) {
  return {static_cast<std::int32_t>(key >> 32),
          static_cast<std::int32_t>(key & 0xffffffffULL)};
}

/// Undirected graph of stops and route edges plus its sparse symmetric 0/1
/// adjacency matrix. Edges record the set of routes that own them.
class TransitNetwork {
 public:
  std::int32_t add_stop(const Stop& s);
  /// Registers a route; consecutive stops become edges (deduplicated across routes).
  void add_route(RouteId id, const std::vector<std::int32_t>& stop_indices);
  /// Adds a bare edge (used when augmenting the network with planned links).
  std::int32_t add_edge(std::int32_t a, std::int32_t b, std::optional<RouteId> owner = {});

  std::size_t stop_count() const { return stops_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Stop& stop(std::int32_t idx) const { return stops_[static_cast<std::size_t>(idx)]; }
  const std::vector<Stop>& stops() const { return stops_; }
  bool has_stop(StopId id) const { return stop_index_.count(id) != 0; }
  std::int32_t stop_index(StopId id) const;  // throws IntegrityError

  const std::vector<TransitEdge>& edges() const { return edges_; }
  const TransitEdge& edge(std::int32_t idx) const { return edges_[static_cast<std::size_t>(idx)]; }
  bool has_edge(std::int32_t a, std::int32_t b) const;
  std::optional<std::int32_t> edge_index(std::int32_t a, std::int32_t b) const;
  const std::vector<std::pair<std::int32_t, std::int32_t>>& neighbors(std::int32_t stop) const {
    return adjacency_[static_cast<std::size_t>(stop)];
  }

  const std::vector<TransitRoute>& routes() const { return routes_; }

  /// Symmetric 0/1 adjacency with zero diagonal.
  Eigen::SparseMatrix<double> adjacency_matrix() const;

 private:
  std::vector<Stop> stops_;
  std::vector<TransitEdge> edges_;
  std::vector<TransitRoute> routes_;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> adjacency_;  // (stop, edge)
  std::unordered_map<StopId, std::int32_t> stop_index_;
  std::unordered_map<std::uint64_t, std::int32_t> edge_index_;
};

/// Planned or existing bus route as an ordered stop walk.
struct RoutePath {
  std::vector<std::int32_t> stops;  // stops.size() == edges.size() + 1 when non-empty
  std::vector<std::int32_t> edges;  // planner-local edge ids
};

}  // namespace buslink
