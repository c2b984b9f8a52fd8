#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "buslink/errors.hpp"
#include "buslink/netio.hpp"

namespace buslink::io {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return in;
}

[[noreturn]] void bad_line(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

RoadNetwork load_road_network(const RoadNetworkFiles& files) {
  RoadNetwork road;

  {
    std::ifstream in = open_or_throw(files.co_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      if (tag == "c" || tag == "p" || tag.empty()) continue;
      if (tag != "v") bad_line(files.co_path, lineno, "expected 'v id x y' record");
      std::int64_t id = 0, x = 0, y = 0;
      if (!(ss >> id >> x >> y)) bad_line(files.co_path, lineno, "malformed coordinate record");
      // DIMACS coordinates: x = longitude, y = latitude, in micro-degrees.
      road.add_vertex(id, GeoPoint{static_cast<double>(y) / 1e6, static_cast<double>(x) / 1e6});
    }
  }

  {
    std::ifstream in = open_or_throw(files.gr_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string tag;
      ss >> tag;
      if (tag == "c" || tag == "p" || tag.empty()) continue;
      if (tag != "a") bad_line(files.gr_path, lineno, "expected 'a u v w' record");
      std::int64_t u = 0, v = 0, w = 0;
      if (!(ss >> u >> v >> w)) bad_line(files.gr_path, lineno, "malformed arc record");
      if (w <= 0) bad_line(files.gr_path, lineno, "arc weight must be a positive integer");
      if (!road.has_vertex(u) || !road.has_vertex(v)) {
        throw IntegrityError(files.gr_path + ":" + std::to_string(lineno) +
                             ": arc references vertex absent from coordinate file");
      }
      road.add_edge(u, v, static_cast<double>(w));
    }
  }

  return road;
}

void save_road_network(const RoadNetwork& road, const RoadNetworkFiles& files) {
  {
    std::ofstream out(files.co_path);
    if (!out) throw ParseError(files.co_path + ": cannot open for writing");
    out << "p aux sp co " << road.vertex_count() << "\n";
    for (std::size_t i = 0; i < road.vertex_count(); ++i) {
      const auto idx = static_cast<std::int32_t>(i);
      const GeoPoint p = road.point(idx);
      out << "v " << road.id_of(idx) << " " << static_cast<std::int64_t>(std::llround(p.lng * 1e6))
          << " " << static_cast<std::int64_t>(std::llround(p.lat * 1e6)) << "\n";
    }
  }
  {
    std::ofstream out(files.gr_path);
    if (!out) throw ParseError(files.gr_path + ": cannot open for writing");
    out << "p sp " << road.vertex_count() << " " << road.edge_count() * 2 << "\n";
    for (const auto& e : road.edges()) {
      const auto w = static_cast<std::int64_t>(std::llround(e.length_m));
      out << "a " << road.id_of(e.u) << " " << road.id_of(e.v) << " " << w << "\n";
      out << "a " << road.id_of(e.v) << " " << road.id_of(e.u) << " " << w << "\n";
    }
  }
}

}  // namespace buslink::io
