#include "buslink/transit_network.hpp"

#include <algorithm>
#include <string>

#include "buslink/errors.hpp"

namespace buslink {

std::int32_t TransitNetwork::add_stop(const Stop& s) {
  if (stop_index_.count(s.id)) {
    throw IntegrityError("transit network: duplicate stop id " + std::to_string(s.id));
  }
  const auto idx = static_cast<std::int32_t>(stops_.size());
  stops_.push_back(s);
  adjacency_.emplace_back();
  stop_index_.emplace(s.id, idx);
  return idx;
}

std::int32_t TransitNetwork::stop_index(StopId id) const {
  auto it = stop_index_.find(id);
  if (it == stop_index_.end()) {
    throw IntegrityError("transit network: unknown stop id " + std::to_string(id));
  }
  return it->second;
}

std::int32_t TransitNetwork::add_edge(std::int32_t a, std::int32_t b,
                                      std::optional<RouteId> owner) {
  if (a == b) throw IntegrityError("transit network: self edge at stop index " + std::to_string(a));
  if (a > b) std::swap(a, b);
  const std::uint64_t key = pack_stop_pair(a, b);
  auto it = edge_index_.find(key);
  std::int32_t eidx;
  if (it != edge_index_.end()) {
    eidx = it->second;
  } else {
    eidx = static_cast<std::int32_t>(edges_.size());
    edges_.push_back(TransitEdge{a, b, {}});
    adjacency_[static_cast<std::size_t>(a)].emplace_back(b, eidx);
    adjacency_[static_cast<std::size_t>(b)].emplace_back(a, eidx);
    edge_index_.emplace(key, eidx);
  }
  if (owner) {
    auto& owners = edges_[static_cast<std::size_t>(eidx)].owners;
    auto pos = std::lower_bound(owners.begin(), owners.end(), *owner);
    if (pos == owners.end() || *pos != *owner) owners.insert(pos, *owner);
  }
  return eidx;
}

void TransitNetwork::add_route(RouteId id, const std::vector<std::int32_t>& stop_indices) {
  if (stop_indices.size() < 2) {
    throw IntegrityError("transit network: route " + std::to_string(id) + " has fewer than 2 stops");
  }
  routes_.push_back(TransitRoute{id, stop_indices});
  for (std::size_t i = 1; i < stop_indices.size(); ++i) {
    add_edge(stop_indices[i - 1], stop_indices[i], id);
  }
}

bool TransitNetwork::has_edge(std::int32_t a, std::int32_t b) const {
  return edge_index_.count(pack_stop_pair(a, b)) != 0;
}

std::optional<std::int32_t> TransitNetwork::edge_index(std::int32_t a, std::int32_t b) const {
  auto it = edge_index_.find(pack_stop_pair(a, b));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

Eigen::SparseMatrix<double> TransitNetwork::adjacency_matrix() const {
  const auto n = static_cast<Eigen::Index>(stops_.size());
  Eigen::SparseMatrix<double> A(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(edges_.size() * 2);
  for (const auto& e : edges_) {
    trips.emplace_back(e.a, e.b, 1.0);
    trips.emplace_back(e.b, e.a, 1.0);
  }
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

}  // namespace buslink
