#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "buslink/geo.hpp"

namespace buslink {

using RoadVertexId = std::int64_t;

struct RoadEdge {
  std::int32_t u = 0;  // dense index, u < v
  std::int32_t v = 0;
  double length_m = 0.0;
  std::int64_t demand = 0;  // trajectory count f_e
};

struct ShortestPath {
  std::vector<RoadVertexId> vertices;
  double length_m = 0.0;
};

/// Undirected road graph with vertex coordinates, edge lengths in meters and
/// per-edge trajectory demand counts. Immutable after load except for the
/// demand counters (trajectory ingestion, multi-route demand zeroing).
class RoadNetwork {
 public:
  std::int32_t add_vertex(RoadVertexId id, GeoPoint p);
  /// Adds (or merges) an undirected edge; duplicate arcs keep the minimum length.
  void add_edge(RoadVertexId a, RoadVertexId b, double length_m);

  bool has_vertex(RoadVertexId id) const { return index_map_.count(id) != 0; }
  std::int32_t index_of(RoadVertexId id) const;  // throws IntegrityError
  RoadVertexId id_of(std::int32_t idx) const { return ids_[static_cast<std::size_t>(idx)]; }
  GeoPoint point(std::int32_t idx) const { return points_[static_cast<std::size_t>(idx)]; }
  GeoPoint point_by_id(RoadVertexId id) const { return point(index_of(id)); }

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<RoadEdge>& edges() const { return edges_; }
  const std::vector<std::pair<std::int32_t, std::int32_t>>& neighbors(std::int32_t idx) const {
    return adjacency_[static_cast<std::size_t>(idx)];
  }
  std::optional<std::int32_t> find_edge(std::int32_t a, std::int32_t b) const;

  void add_demand(std::int32_t edge_idx, std::int64_t count = 1);
  void zero_demand(std::int32_t edge_idx);
  void reset_demand();
  std::int64_t demand(std::int32_t edge_idx) const {
    return edges_[static_cast<std::size_t>(edge_idx)].demand;
  }

  /// Minimum-length path under Dijkstra. Ties resolve to the
  /// lexicographically smallest vertex-id sequence. Throws NoPathError.
  ShortestPath shortest_path(RoadVertexId from, RoadVertexId to) const;

  /// Sum of f_e * |e| over the traversed edges. Throws IntegrityError on a
  /// non-adjacent consecutive pair.
  double path_demand(const std::vector<RoadVertexId>& path) const;
  double path_length(const std::vector<RoadVertexId>& path) const;

 private:
  std::vector<RoadVertexId> ids_;
  std::vector<GeoPoint> points_;
  std::vector<RoadEdge> edges_;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> adjacency_;  // (neighbor, edge)
  std::unordered_map<RoadVertexId, std::int32_t> index_map_;
};

}  // namespace buslink
