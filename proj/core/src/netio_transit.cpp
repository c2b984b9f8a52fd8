#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "buslink/errors.hpp"
#include "buslink/netio.hpp"

namespace buslink::io {

namespace {

using nlohmann::json;

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return doc;
}

TransitNetwork build_transit(const json& doc, const std::string& path, const RoadNetwork* road) {
  TransitNetwork net;
  if (!doc.contains("stops") || !doc["stops"].is_array()) {
    throw ParseError(path + ": missing 'stops' array");
  }
  if (!doc.contains("routes") || !doc["routes"].is_array()) {
    throw ParseError(path + ": missing 'routes' array");
  }
  for (const auto& s : doc["stops"]) {
    Stop stop;
    try {
      stop.id = s.at("id").get<StopId>();
      stop.road_vertex = s.at("road_vertex").get<RoadVertexId>();
      stop.pos.lat = s.at("lat").get<double>();
      stop.pos.lng = s.at("lng").get<double>();
    } catch (const json::exception& e) {
      throw ParseError(path + ": malformed stop record: " + e.what());
    }
    if (road && !road->has_vertex(stop.road_vertex)) {
      throw IntegrityError(path + ": stop " + std::to_string(stop.id) +
                           " references unknown road vertex " + std::to_string(stop.road_vertex));
    }
    net.add_stop(stop);
  }
  for (const auto& r : doc["routes"]) {
    RouteId rid;
    std::vector<StopId> seq;
    try {
      rid = r.at("id").get<RouteId>();
      seq = r.at("stop_sequence").get<std::vector<StopId>>();
    } catch (const json::exception& e) {
      throw ParseError(path + ": malformed route record: " + e.what());
    }
    std::vector<std::int32_t> indices;
    indices.reserve(seq.size());
    for (StopId sid : seq) indices.push_back(net.stop_index(sid));
    net.add_route(rid, indices);
  }
  return net;
}

}  // namespace

TransitNetwork load_transit_network(const std::string& path, const RoadNetwork& road) {
  return build_transit(parse_json_file(path), path, &road);
}

TransitNetwork load_transit_network_standalone(const std::string& path) {
  return build_transit(parse_json_file(path), path, nullptr);
}

void save_transit_network(const TransitNetwork& net, const std::string& path) {
  json doc;
  doc["stops"] = json::array();
  for (const auto& s : net.stops()) {
    doc["stops"].push_back({{"id", s.id},
                            {"road_vertex", s.road_vertex},
                            {"lat", s.pos.lat},
                            {"lng", s.pos.lng}});
  }
  doc["routes"] = json::array();
  for (const auto& r : net.routes()) {
    json seq = json::array();
    for (std::int32_t idx : r.stops) seq.push_back(net.stop(idx).id);
    doc["routes"].push_back({{"id", r.id}, {"stop_sequence", seq}});
  }
  write_text_file(path, doc.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace buslink::io
