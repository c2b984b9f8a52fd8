#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "buslink/road_network.hpp"
#include "buslink/spectral.hpp"
#include "buslink/transit_network.hpp"

namespace buslink {

/// A potential new stop-to-stop link (or an annotated existing edge) with its
/// underlying road path, aggregated demand and connectivity increment.
struct CandidateEdge {
  std::int32_t stop_a = 0;  // stop indices, stop_a < stop_b
  std::int32_t stop_b = 0;
  std::vector<RoadVertexId> road_path;
  double length_m = 0.0;
  double demand = 0.0;  // sum of f_e * |e| along road_path
  double delta = 0.0;   // connectivity increment Delta(e); 0 for existing edges
  bool is_new = true;
};

struct CandidateGenStats {
  std::size_t pairs_within_tau = 0;
  std::size_t unreachable_dropped = 0;
};

/// All unordered stop pairs within straight-line distance tau that are not
/// already transit edges, filled with their shortest road path and demand.
/// Road-unreachable pairs are dropped and tallied.
std::vector<CandidateEdge> generate_candidate_edges(const RoadNetwork& road,
                                                    const TransitNetwork& transit, double tau_m,
                                                    CandidateGenStats* stats = nullptr,
                                                    int threads = 1);

/// Road path, length and demand for every existing transit edge (delta = 0).
std::vector<CandidateEdge> annotate_existing_edges(const RoadNetwork& road,
                                                   const TransitNetwork& transit, int threads = 1);

/// lambda(A + e) - lambda(A). Both terms use the same estimator configuration
/// (or the exact oracle). Throws if e is already present in A.
double connectivity_increment(const Eigen::SparseMatrix<double>& A,
                              std::pair<std::int32_t, std::int32_t> e,
                              const spectral::SpectralParams& params, bool exact = false);

/// Fills delta for every new candidate; existing edges keep delta = 0.
/// lambda(A) is evaluated once and shared.
void compute_connectivity_increments(const Eigen::SparseMatrix<double>& A,
                                     std::vector<CandidateEdge>& candidates,
                                     const spectral::SpectralParams& params, bool exact = false,
                                     int threads = 1);

/// Descending-sorted edge list with positional access L(i) (1-indexed) and
/// keyed lookup L[e]. Ties order by edge id (packed stop pair).
class RankedEdgeList {
 public:
  struct Entry {
    std::uint64_t edge = 0;
    double key = 0.0;
  };

  RankedEdgeList() = default;
  explicit RankedEdgeList(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double key_at(std::size_t rank1) const;               // L(i)
  std::uint64_t edge_at(std::size_t rank1) const;
  std::optional<std::size_t> rank_of(std::uint64_t edge) const;  // 1-indexed
  std::optional<double> key_of(std::uint64_t edge) const;        // L[e]
  double top_sum(std::size_t count) const;  // sum of L(1..min(count, size))
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::uint64_t, std::size_t> rank_;  // edge -> 0-based position
};

struct Normalizers {
  double d_max = 0.0;
  double lambda_max = 0.0;
};

struct RankedLists {
  RankedEdgeList demand;      // L_d: new edges by demand
  RankedEdgeList delta;       // L_lambda: new edges by connectivity increment
  RankedEdgeList integrated;  // L_e: new + existing edges by the weighted key
};

RankedEdgeList make_demand_list(const std::vector<CandidateEdge>& candidates);
RankedEdgeList make_delta_list(const std::vector<CandidateEdge>& candidates);

/// d_max = sum of top-k demand keys, lambda_max = sum of top-k delta keys
/// (all entries when the list is shorter than k).
Normalizers compute_normalizers(const RankedEdgeList& demand, const RankedEdgeList& delta, int k);

/// L_e over new and existing edges: w * L_d[e]/d_max + (1-w) * L_lambda[e]/lambda_max
/// with existing-edge delta fixed at 0. A zero normalizer under a positive
/// weight is a configuration error.
RankedEdgeList make_integrated_list(const std::vector<CandidateEdge>& candidates,
                                    const std::vector<CandidateEdge>& existing, double w,
                                    const Normalizers& norm);

RankedLists build_ranked_lists(const std::vector<CandidateEdge>& candidates,
                               const std::vector<CandidateEdge>& existing, double w,
                               const Normalizers& norm);

struct GreedyTopK {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  bool truncated = false;  // fewer than k candidates were available
};

/// Top-k candidate edges by precomputed delta (static ranking), or greedy
/// re-estimation against the growing graph when recompute is set.
GreedyTopK greedy_topk_edges(const std::vector<CandidateEdge>& candidates, int k,
                             bool recompute = false,
                             const Eigen::SparseMatrix<double>* A = nullptr,
                             const spectral::SpectralParams* params = nullptr, bool exact = false);

/// Preprocessing artifact: candidates and existing-edge annotations keyed by a
/// content hash of the inputs that produced them.
struct PrecomputeCache {
  std::string input_hash;
  double tau_m = 500.0;
  spectral::SpectralParams params;
  bool exact = false;
  double lambda_base = 0.0;
  // Stop indices are stable because the cache is only valid for byte-identical
  // inputs (enforced through input_hash).
  std::vector<CandidateEdge> candidates;
  std::vector<CandidateEdge> existing;
  CandidateGenStats stats;
};

void save_cache(const PrecomputeCache& cache, const std::string& path);
PrecomputeCache load_cache(const std::string& path);

/// FNV-1a over the given files' bytes plus the extra tokens; 16 hex digits.
std::string hash_inputs(const std::vector<std::string>& file_paths,
                        const std::vector<std::string>& extra_tokens);

}  // namespace buslink
