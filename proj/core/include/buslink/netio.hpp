#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "buslink/road_network.hpp"
#include "buslink/transit_network.hpp"

namespace buslink::io {

struct RoadNetworkFiles {
  std::string gr_path;  // DIMACS arc list ("a u v w")
  std::string co_path;  // DIMACS coordinates ("v id x y", micro-degrees)
};

RoadNetwork load_road_network(const RoadNetworkFiles& files);
void save_road_network(const RoadNetwork& road, const RoadNetworkFiles& files);

/// Transit network document: {"stops": [{id, road_vertex, lat, lng}],
/// "routes": [{id, stop_sequence}]}. Stop road vertices must exist in the
/// road network.
TransitNetwork load_transit_network(const std::string& path, const RoadNetwork& road);
/// Same schema without road-network cross checks (connectivity-only tooling).
TransitNetwork load_transit_network_standalone(const std::string& path);
void save_transit_network(const TransitNetwork& net, const std::string& path);

struct TrajectoryStats {
  std::size_t trajectories = 0;
  std::size_t edge_hits = 0;  // distinct (trajectory, edge) pairs counted into f_e
};

/// One trajectory per line, whitespace-separated road vertex ids. Each
/// trajectory increments f_e once for every distinct road edge it covers.
TrajectoryStats load_trajectories(const std::string& path, RoadNetwork& road);
void save_trajectories(const std::vector<std::vector<RoadVertexId>>& trajectories,
                       const std::string& path);

struct RouteEdgeGeometry {
  std::vector<GeoPoint> line;  // polyline through road vertices (or stop-to-stop)
  StopId from = 0;
  StopId to = 0;
  bool is_new = false;
};

/// RFC 7946 FeatureCollection with one LineString per route edge; new edges
/// carry "new": true. Coordinates are emitted in lng,lat order.
std::string make_route_geojson(const std::vector<RouteEdgeGeometry>& edges,
                               const std::map<std::string, double>& properties);

struct RouteReport {
  std::vector<StopId> route;
  std::vector<std::pair<StopId, StopId>> new_edges;
  double objective = 0.0;
  double demand_term = 0.0;       // O_d / d_max
  double connectivity_term = 0.0; // O_lambda / lambda_max
  double demand_raw = 0.0;
  double connectivity_raw = 0.0;
  std::string termination;
  std::int64_t iterations = 0;
  std::map<std::string, double> metrics;
};

std::string route_report_to_json(const RouteReport& report);
std::string route_reports_to_json(const std::vector<RouteReport>& reports);
RouteReport route_report_from_json_text(const std::string& text);
std::vector<RouteReport> route_reports_from_file(const std::string& path);

/// Flat "key = value" configuration file; '#' starts a comment.
std::map<std::string, std::string> read_flat_config(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace buslink::io
