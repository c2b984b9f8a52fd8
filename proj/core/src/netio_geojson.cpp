#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "buslink/errors.hpp"
#include "buslink/netio.hpp"

namespace buslink::io {

namespace {
using nlohmann::json;
}

std::string make_route_geojson(const std::vector<RouteEdgeGeometry>& edges,
                               const std::map<std::string, double>& properties) {
  json features = json::array();
  for (const auto& e : edges) {
    json coords = json::array();
    for (const GeoPoint& p : e.line) coords.push_back({p.lng, p.lat});
    json props = {{"from", e.from}, {"to", e.to}, {"new", e.is_new}};
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", props}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  if (!properties.empty()) {
    json props;
    for (const auto& [k, v] : properties) props[k] = v;
    doc["properties"] = props;
  }
  return doc.dump(2) + "\n";
}

std::string route_report_to_json(const RouteReport& report) {
  json doc;
  doc["route"] = report.route;
  json ne = json::array();
  for (const auto& [a, b] : report.new_edges) ne.push_back({a, b});
  doc["new_edges"] = ne;
  doc["objective"] = report.objective;
  doc["demand_term"] = report.demand_term;
  doc["connectivity_term"] = report.connectivity_term;
  doc["demand_raw"] = report.demand_raw;
  doc["connectivity_raw"] = report.connectivity_raw;
  doc["termination"] = report.termination;
  doc["iterations"] = report.iterations;
  if (!report.metrics.empty()) {
    json m;
    for (const auto& [k, v] : report.metrics) m[k] = v;
    doc["metrics"] = m;
  }
  return doc.dump(2) + "\n";
}

std::string route_reports_to_json(const std::vector<RouteReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(json::parse(route_report_to_json(r)));
  json doc = {{"routes", arr}};
  return doc.dump(2) + "\n";
}

namespace {

RouteReport report_from_json(const json& doc, const std::string& context) {
  RouteReport r;
  try {
    r.route = doc.at("route").get<std::vector<StopId>>();
    for (const auto& e : doc.at("new_edges")) {
      r.new_edges.emplace_back(e.at(0).get<StopId>(), e.at(1).get<StopId>());
    }
    r.objective = doc.at("objective").get<double>();
    r.demand_term = doc.at("demand_term").get<double>();
    r.connectivity_term = doc.at("connectivity_term").get<double>();
    r.demand_raw = doc.value("demand_raw", 0.0);
    r.connectivity_raw = doc.value("connectivity_raw", 0.0);
    r.termination = doc.value("termination", std::string{});
    r.iterations = doc.value("iterations", std::int64_t{0});
    if (doc.contains("metrics")) {
      for (auto it = doc["metrics"].begin(); it != doc["metrics"].end(); ++it) {
        r.metrics[it.key()] = it.value().get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(context + ": malformed route report: " + e.what());
  }
  return r;
}

}  // namespace

RouteReport route_report_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("route report: ") + e.what());
  }
  return report_from_json(doc, "route report");
}

std::vector<RouteReport> route_reports_from_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::vector<RouteReport> out;
  if (doc.contains("routes")) {
    for (const auto& r : doc["routes"]) out.push_back(report_from_json(r, path));
  } else {
    out.push_back(report_from_json(doc, path));
  }
  return out;
}

}  // namespace buslink::io
