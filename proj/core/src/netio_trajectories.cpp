#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "buslink/errors.hpp"
#include "buslink/netio.hpp"

namespace buslink::io {

TrajectoryStats load_trajectories(const std::string& path, RoadNetwork& road) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  TrajectoryStats stats;
  std::string line;
  std::size_t lineno = 0;
  std::unordered_set<std::int32_t> seen;  // edge indices covered by the current line
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<RoadVertexId> verts;
    RoadVertexId v;
    while (ss >> v) verts.push_back(v);
    if (verts.empty()) continue;
    seen.clear();
    for (std::size_t i = 1; i < verts.size(); ++i) {
      std::int32_t a, b;
      try {
        a = road.index_of(verts[i - 1]);
        b = road.index_of(verts[i]);
      } catch (const IntegrityError& e) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      const auto eidx = road.find_edge(a, b);
      if (!eidx) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": consecutive vertices " +
                         std::to_string(verts[i - 1]) + " and " + std::to_string(verts[i]) +
                         " are not adjacent in the road network");
      }
      seen.insert(*eidx);
    }
    // f_e counts trajectories that include the edge, so each line adds one per
    // distinct edge even if the walk repeats it.
    for (std::int32_t e : seen) road.add_demand(e);
    stats.edge_hits += seen.size();
    ++stats.trajectories;
  }
  return stats;
}

void save_trajectories(const std::vector<std::vector<RoadVertexId>>& trajectories,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  for (const auto& t : trajectories) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out << ' ';
      out << t[i];
    }
    out << '\n';
  }
}

}  // namespace buslink::io
