#include "buslink/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "buslink/errors.hpp"
#include "buslink/geo.hpp"

namespace buslink::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t s) : state(splitmix64(s ^ 0xA5A5A5A5DEADBEEFULL)) {}
  std::uint64_t next() { return state = splitmix64(state); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

}  // namespace

SynthCity make_grid_city(const GridCityConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 2) throw ConfigError("grid city needs at least a 2x2 lattice");
  SynthCity city;
  const double dlat = cfg.spacing_m / 111320.0;
  const double dlng =
      cfg.spacing_m / (111320.0 * std::cos(cfg.origin.lat * 3.14159265358979323846 / 180.0));

  const auto vid = [&](int r, int c) -> RoadVertexId {
    return static_cast<RoadVertexId>(r) * cfg.cols + c + 1;
  };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      city.road.add_vertex(vid(r, c),
                           GeoPoint{cfg.origin.lat + r * dlat, cfg.origin.lng + c * dlng});
    }
  }
  // Up to +-8% deterministic length jitter; without it every grid shortest
  // path degenerates to the same staircase and demand piles onto a few edges.
  const auto edge_len = [&](RoadVertexId a, RoadVertexId b) {
    const double base = haversine_m(city.road.point_by_id(a), city.road.point_by_id(b));
    const std::uint64_t h = splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(a) << 20) ^
                                       static_cast<std::uint64_t>(b));
    const double jitter = 0.92 + 0.16 * (static_cast<double>(h % 10000) / 10000.0);
    return std::max(1.0, std::round(base * jitter));
  };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      if (c + 1 < cfg.cols) {
        city.road.add_edge(vid(r, c), vid(r, c + 1), edge_len(vid(r, c), vid(r, c + 1)));
      }
      if (r + 1 < cfg.rows) {
        city.road.add_edge(vid(r, c), vid(r + 1, c), edge_len(vid(r, c), vid(r + 1, c)));
      }
    }
  }

  // Stops sit on every lattice vertex (horizontal routes cover all rows).
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      Stop s;
      s.id = vid(r, c);
      s.road_vertex = vid(r, c);
      s.pos = city.road.point_by_id(s.road_vertex);
      city.transit.add_stop(s);
    }
  }
  RouteId next_route = 1;
  for (int r = 0; r < cfg.rows; ++r) {
    std::vector<std::int32_t> seq;
    for (int c = 0; c < cfg.cols; ++c) seq.push_back(city.transit.stop_index(vid(r, c)));
    city.transit.add_route(next_route++, seq);
  }
  for (int c = 0; c < cfg.cols; c += std::max(1, cfg.vertical_route_step)) {
    std::vector<std::int32_t> seq;
    for (int r = 0; r < cfg.rows; ++r) seq.push_back(city.transit.stop_index(vid(r, c)));
    city.transit.add_route(next_route++, seq);
  }

  Rng rng(cfg.seed);
  const std::size_t nverts = city.road.vertex_count();
  for (int t = 0; t < cfg.trajectories; ++t) {
    const auto a = static_cast<std::int32_t>(rng.below(nverts));
    auto b = static_cast<std::int32_t>(rng.below(nverts));
    if (a == b) b = static_cast<std::int32_t>((b + 1) % nverts);
    const auto sp = city.road.shortest_path(city.road.id_of(a), city.road.id_of(b));
    city.trajectories.push_back(sp.vertices);
    for (std::size_t i = 1; i < sp.vertices.size(); ++i) {
      const auto u = city.road.index_of(sp.vertices[i - 1]);
      const auto v = city.road.index_of(sp.vertices[i]);
      if (auto e = city.road.find_edge(u, v)) city.road.add_demand(*e);
    }
  }
  return city;
}

Eigen::SparseMatrix<double> random_connected_adjacency(int n, double mean_degree,
                                                       std::uint64_t seed) {
  if (n < 2) throw ConfigError("random_connected_adjacency: n must be >= 2");
  Rng rng(seed);
  std::unordered_set<std::uint64_t> edges;
  const auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  std::vector<std::pair<int, int>> list;

  // Locality-biased spanning tree keeps the spectrum transit-like.
  const int window = 8;
  for (int i = 1; i < n; ++i) {
    const int lo = std::max(0, i - window);
    const int parent = lo + static_cast<int>(rng.below(static_cast<std::size_t>(i - lo)));
    edges.insert(key(i, parent));
    list.emplace_back(std::min(i, parent), std::max(i, parent));
  }
  const auto target = static_cast<std::size_t>(std::max(
      static_cast<double>(n - 1), std::round(mean_degree * n / 2.0)));
  std::size_t guard = 0;
  while (edges.size() < target && guard++ < 50u * target) {
    const int a = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
    const int lo = std::max(0, a - 2 * window);
    const int hi = std::min(n - 1, a + 2 * window);
    const int b = lo + static_cast<int>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
    if (a == b) continue;
    if (edges.insert(key(a, b)).second) list.emplace_back(std::min(a, b), std::max(a, b));
  }

  Eigen::SparseMatrix<double> A(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(list.size() * 2);
  for (const auto& [a, b] : list) {
    trips.emplace_back(a, b, 1.0);
    trips.emplace_back(b, a, 1.0);
  }
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

std::vector<std::pair<std::int32_t, std::int32_t>> sample_new_path(
    const Eigen::SparseMatrix<double>& A, int k, std::uint64_t seed) {
  const auto n = static_cast<std::int32_t>(A.rows());
  if (k < 1 || k + 1 > n) return {};
  Rng rng(seed);
  for (int attempt = 0; attempt < 500; ++attempt) {
    std::vector<std::int32_t> verts;
    std::unordered_set<std::int32_t> used;
    verts.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::size_t>(n))));
    used.insert(verts.back());
    bool ok = true;
    while (static_cast<int>(verts.size()) < k + 1) {
      bool advanced = false;
      for (int tries = 0; tries < 50; ++tries) {
        const auto cand = static_cast<std::int32_t>(rng.below(static_cast<std::size_t>(n)));
        if (used.count(cand)) continue;
        if (A.coeff(verts.back(), cand) != 0.0) continue;
        verts.push_back(cand);
        used.insert(cand);
        advanced = true;
        break;
      }
      if (!advanced) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<std::pair<std::int32_t, std::int32_t>> path;
    for (int i = 0; i < k; ++i) path.emplace_back(verts[i], verts[i + 1]);
    return path;
  }
  return {};
}

std::vector<std::pair<std::int32_t, std::int32_t>> sample_new_edges(
    const Eigen::SparseMatrix<double>& A, int k, std::uint64_t seed) {
  const auto n = static_cast<std::int32_t>(A.rows());
  if (k < 1 || n < 2) return {};
  Rng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::size_t guard = 0;
  while (static_cast<int>(edges.size()) < k && guard++ < 100000) {
    auto a = static_cast<std::int32_t>(rng.below(static_cast<std::size_t>(n)));
    auto b = static_cast<std::int32_t>(rng.below(static_cast<std::size_t>(n)));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (A.coeff(a, b) != 0.0) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
                              static_cast<std::uint32_t>(b);
    if (!chosen.insert(key).second) continue;
    edges.emplace_back(a, b);
  }
  if (static_cast<int>(edges.size()) < k) return {};
  return edges;
}

}  // namespace buslink::synth
