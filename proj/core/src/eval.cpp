#include "buslink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <unordered_set>

#include "buslink/errors.hpp"
#include "buslink/geo.hpp"

namespace buslink::eval {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t s) : state(splitmix64(s)) {}
  std::uint64_t next() { return state = splitmix64(state); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

/// Single-source transit Dijkstra; returns per-stop distance (inf when
/// unreachable). Edge weights come from `lengths`.
std::vector<double> transit_dijkstra(const TransitNetwork& net, const std::vector<double>& lengths,
                                     std::int32_t source) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.stop_count(), inf);
  std::vector<char> settled(net.stop_count(), 0);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(source)] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    for (const auto& [v, eidx] : net.neighbors(u)) {
      const double nd = d + lengths[static_cast<std::size_t>(eidx)];
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

/// Walks a shortest path from `from` toward `to` using dist-to-`to`; ties pick
/// the smallest stop id. Returns the traversed edge indices.
std::vector<std::int32_t> shortest_edge_seq(const TransitNetwork& net,
                                            const std::vector<double>& lengths,
                                            const std::vector<double>& dist_to_target,
                                            std::int32_t from, std::int32_t to) {
  std::vector<std::int32_t> edges;
  std::int32_t cur = from;
  std::size_t guard = 0;
  while (cur != to && guard++ <= net.stop_count()) {
    std::int32_t best_stop = -1;
    std::int32_t best_edge = -1;
    StopId best_id = 0;
    const double dcur = dist_to_target[static_cast<std::size_t>(cur)];
    for (const auto& [v, eidx] : net.neighbors(cur)) {
      if (dist_to_target[static_cast<std::size_t>(v)] + lengths[static_cast<std::size_t>(eidx)] ==
          dcur) {
        const StopId vid = net.stop(v).id;
        if (best_stop < 0 || vid < best_id) {
          best_stop = v;
          best_edge = eidx;
          best_id = vid;
        }
      }
    }
    if (best_stop < 0) break;
    edges.push_back(best_edge);
    cur = best_stop;
  }
  return edges;
}

}  // namespace

std::vector<double> transit_edge_lengths(const TransitNetwork& net, const RoadNetwork& road) {
  std::vector<double> lengths(net.edge_count(), 0.0);
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    const auto& e = net.edge(static_cast<std::int32_t>(i));
    const Stop& sa = net.stop(e.a);
    const Stop& sb = net.stop(e.b);
    try {
      lengths[i] = road.shortest_path(sa.road_vertex, sb.road_vertex).length_m;
    } catch (const NoPathError&) {
      lengths[i] = haversine_m(sa.pos, sb.pos);
    }
  }
  return lengths;
}

int min_transfers(const TransitNetwork& net, const std::vector<std::int32_t>& edge_seq) {
  if (edge_seq.empty()) return 0;
  // Greedy interval covering over owning-route sets is optimal for minimum
  // label changes along a fixed edge sequence.
  std::vector<RouteId> current = net.edge(edge_seq.front()).owners;
  int segments = 1;
  for (std::size_t i = 1; i < edge_seq.size(); ++i) {
    const auto& owners = net.edge(edge_seq[i]).owners;
    std::vector<RouteId> inter;
    std::set_intersection(current.begin(), current.end(), owners.begin(), owners.end(),
                          std::back_inserter(inter));
    if (inter.empty()) {
      ++segments;
      current = owners;
    } else {
      current = std::move(inter);
    }
  }
  return segments - 1;
}

TransferMetrics transfer_metrics(const std::vector<std::int32_t>& mu_stops,
                                 const TransitNetwork& old_net,
                                 const std::vector<double>& old_lengths,
                                 const TransitNetwork& new_net,
                                 const std::vector<double>& new_lengths) {
  TransferMetrics m;

  // Distinct stops of mu, order preserved.
  std::vector<std::int32_t> stops;
  {
    std::unordered_set<std::int32_t> seen;
    for (std::int32_t s : mu_stops) {
      if (seen.insert(s).second) stops.push_back(s);
    }
  }
  if (stops.size() < 2) return m;

  // One Dijkstra per stop on each network; pairs then read distances and walk
  // old-network shortest paths for transfer counting.
  std::vector<std::vector<double>> old_dist(stops.size());
  std::vector<std::vector<double>> new_dist(stops.size());
  for (std::size_t i = 0; i < stops.size(); ++i) {
    old_dist[i] = transit_dijkstra(old_net, old_lengths, stops[i]);
    new_dist[i] = transit_dijkstra(new_net, new_lengths, stops[i]);
  }

  double transfer_sum = 0.0;
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    for (std::size_t j = i + 1; j < stops.size(); ++j) {
      const double d_old = old_dist[j][static_cast<std::size_t>(stops[i])];
      const double d_new = new_dist[j][static_cast<std::size_t>(stops[i])];
      if (!std::isfinite(d_old)) {
        ++m.pairs_skipped;
        continue;
      }
      double ratio;
      if (d_new > 0.0) {
        ratio = d_old / d_new;
      } else if (d_old == 0.0) {
        ratio = 1.0;
      } else {
        ++m.pairs_skipped;
        continue;
      }
      const auto edge_seq =
          shortest_edge_seq(old_net, old_lengths, old_dist[j], stops[i], stops[j]);
      transfer_sum += min_transfers(old_net, edge_seq);
      ratio_sum += ratio;
      ++m.pairs_evaluated;
    }
  }
  if (m.pairs_evaluated > 0) {
    m.transfers_avoided = transfer_sum / static_cast<double>(m.pairs_evaluated);
    m.distance_ratio = ratio_sum / static_cast<double>(m.pairs_evaluated);
  }

  std::unordered_set<std::int32_t> mu_set(stops.begin(), stops.end());
  for (const auto& r : old_net.routes()) {
    for (std::int32_t s : r.stops) {
      if (mu_set.count(s)) {
        ++m.crossed_routes;
        break;
      }
    }
  }
  return m;
}

std::vector<MonotonicityPoint> monotonicity_experiment(const TransitNetwork& net, int steps,
                                                       const spectral::SpectralParams& params,
                                                       bool exact, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("monotonicity_experiment: steps must be >= 1");
  const std::size_t total = net.routes().size();
  if (total == 0) throw ConfigError("monotonicity_experiment: network has no routes");
  for (const auto& e : net.edges()) {
    if (e.owners.empty()) {
      throw ConfigError("monotonicity_experiment: edge without an owning route");
    }
  }

  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = total; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  const auto lambda_of = [&](const std::unordered_set<RouteId>& removed) {
    const auto n = static_cast<Eigen::Index>(net.stop_count());
    Eigen::SparseMatrix<double> A(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& e : net.edges()) {
      bool alive = false;
      for (RouteId r : e.owners) {
        if (!removed.count(r)) {
          alive = true;
          break;
        }
      }
      if (alive) {
        trips.emplace_back(e.a, e.b, 1.0);
        trips.emplace_back(e.b, e.a, 1.0);
      }
    }
    A.setFromTriplets(trips.begin(), trips.end());
    if (A.nonZeros() == 0) return 0.0;
    return exact ? spectral::natural_connectivity_exact(A)
                 : spectral::natural_connectivity(A, params);
  };

  const std::size_t stride = std::max<std::size_t>(
      1, (total + static_cast<std::size_t>(steps) - 1) / static_cast<std::size_t>(steps));
  std::vector<MonotonicityPoint> points;
  std::unordered_set<RouteId> removed;
  points.push_back({0, 0.0, lambda_of(removed)});
  for (std::size_t i = 0; i < total; ++i) {
    removed.insert(net.routes()[order[i]].id);
    const std::size_t done = i + 1;
    if (done % stride == 0 || done == total) {
      points.push_back(
          {done, static_cast<double>(done) / static_cast<double>(total), lambda_of(removed)});
    }
  }
  return points;
}

std::vector<ThetaSample> submodularity_experiment(const Eigen::SparseMatrix<double>& A,
                                                  const std::vector<CandidateEdge>& candidates,
                                                  const std::vector<int>& sizes, int trials,
                                                  const spectral::SpectralParams& params,
                                                  bool exact, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("submodularity_experiment: trials must be >= 1");
  const auto lambda_of = [&](const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
    return exact ? spectral::natural_connectivity_exact(A, edges)
                 : spectral::natural_connectivity(A, edges, params);
  };
  const double base = lambda_of({});

  std::vector<ThetaSample> samples;
  for (int size : sizes) {
    if (size < 1 || static_cast<std::size_t>(size) > candidates.size()) continue;
    for (int trial = 0; trial < trials; ++trial) {
      Rng rng(seed ^ (static_cast<std::uint64_t>(size) << 32) ^
              static_cast<std::uint64_t>(trial));
      // Sample `size` distinct candidate indices.
      std::unordered_set<std::size_t> chosen;
      while (chosen.size() < static_cast<std::size_t>(size)) {
        chosen.insert(rng.below(candidates.size()));
      }
      std::vector<std::size_t> idx(chosen.begin(), chosen.end());
      std::sort(idx.begin(), idx.end());

      std::vector<std::pair<std::int32_t, std::int32_t>> edges;
      edges.reserve(idx.size());
      for (std::size_t i : idx) edges.emplace_back(candidates[i].stop_a, candidates[i].stop_b);

      const double joint = lambda_of(edges) - base;
      double delta_sum = 0.0;
      for (const auto& e : edges) delta_sum += lambda_of({e}) - base;
      if (delta_sum == 0.0) continue;

      ThetaSample s;
      s.size = size;
      s.trial = trial;
      s.o_lambda = joint;
      s.delta_sum = delta_sum;
      s.theta = (joint - delta_sum) / delta_sum;
      samples.push_back(s);
    }
  }
  return samples;
}

BoundRow bound_tightness_row(const Eigen::SparseMatrix<double>& A,
                             const std::vector<std::pair<std::int32_t, std::int32_t>>& added_path,
                             double increment_topk_sum) {
  const auto n = static_cast<std::int64_t>(A.rows());
  const int k = static_cast<int>(added_path.size());
  BoundRow row;
  row.k = k;
  row.lambda_old = spectral::natural_connectivity_exact(A);
  row.lambda_new = spectral::natural_connectivity_exact(A, added_path);

  // Exact eigenvalues feed the bound formulas so soundness reflects the
  // formulas themselves rather than solver error.
  Eigen::MatrixXd D(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  std::vector<double> eig(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(eig.begin(), eig.end(), std::greater<double>());

  const std::int64_t m_edges = A.nonZeros() / 2;
  row.estrada = spectral::estrada_upper_bound(m_edges, n, k);
  if (k >= 1) {
    const auto want2k = static_cast<std::size_t>(std::min<std::int64_t>(2 * k, n));
    std::vector<double> top2k(eig.begin(), eig.begin() + want2k);
    row.general = spectral::general_upper_bound(row.lambda_old, top2k, k, n);
    const auto need = static_cast<std::size_t>((k + 1) / 2);
    std::vector<double> top(eig.begin(), eig.begin() + need);
    row.path = spectral::path_upper_bound(row.lambda_old, top, k, n);
  } else {
    row.general = row.lambda_old;
    row.path = row.lambda_old;
  }
  row.increment = row.lambda_old + increment_topk_sum;
  return row;
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string monotonicity_csv(const std::vector<MonotonicityPoint>& points) {
  std::string out = "routes_removed,fraction_removed,lambda\n";
  for (const auto& p : points) {
    out += std::to_string(p.routes_removed) + "," + fmt(p.fraction_removed) + "," +
           fmt(p.lambda) + "\n";
  }
  return out;
}

std::string theta_csv(const std::vector<ThetaSample>& samples) {
  std::string out = "size,trial,o_lambda,delta_sum,theta\n";
  for (const auto& s : samples) {
    out += std::to_string(s.size) + "," + std::to_string(s.trial) + "," + fmt(s.o_lambda) + "," +
           fmt(s.delta_sum) + "," + fmt(s.theta) + "\n";
  }
  return out;
}

std::string bounds_csv(const std::vector<BoundRow>& rows) {
  std::string out = "k,lambda_old,lambda_new,estrada_bound,general_bound,path_bound,increment\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + "," + fmt(r.lambda_old) + "," + fmt(r.lambda_new) + "," +
           fmt(r.estrada) + "," + fmt(r.general) + "," + fmt(r.path) + "," + fmt(r.increment) +
           "\n";
  }
  return out;
}

}  // namespace buslink::eval
