#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "buslink/candidates.hpp"
#include "buslink/road_network.hpp"
#include "buslink/spectral.hpp"
#include "buslink/transit_network.hpp"

namespace buslink::eval {

struct TransferMetrics {
  double transfers_avoided = 0.0;  // mean transfers needed in the old network
  double distance_ratio = 0.0;     // zeta >= 1
  std::int64_t crossed_routes = 0;
  std::int64_t pairs_evaluated = 0;
  std::int64_t pairs_skipped = 0;  // disconnected in the old network
};

/// Travel length of each transit edge: shortest road path between its stops'
/// road vertices; straight-line fallback when unreachable.
std::vector<double> transit_edge_lengths(const TransitNetwork& net, const RoadNetwork& road);

/// Transfer-convenience metrics of route mu (stop indices valid in both
/// networks): mean old-network transfers over unordered stop pairs of mu,
/// distance ratio zeta (old shortest distance / new shortest distance), and
/// the number of existing routes sharing a stop with mu.
TransferMetrics transfer_metrics(const std::vector<std::int32_t>& mu_stops,
                                 const TransitNetwork& old_net,
                                 const std::vector<double>& old_lengths,
                                 const TransitNetwork& new_net,
                                 const std::vector<double>& new_lengths);

/// Minimum route-label changes needed to ride the given edge sequence.
int min_transfers(const TransitNetwork& net, const std::vector<std::int32_t>& edge_seq);

struct MonotonicityPoint {
  std::size_t routes_removed = 0;
  double fraction_removed = 0.0;
  double lambda = 0.0;
};

/// Removes whole routes cumulatively in seeded random order, recording the
/// connectivity after roughly `steps` evenly spaced removals (plus start/end).
std::vector<MonotonicityPoint> monotonicity_experiment(const TransitNetwork& net, int steps,
                                                       const spectral::SpectralParams& params,
                                                       bool exact, std::uint64_t seed);

struct ThetaSample {
  int size = 0;
  int trial = 0;
  double o_lambda = 0.0;   // joint increment of the sampled edge set
  double delta_sum = 0.0;  // sum of per-edge increments
  double theta = 0.0;      // (o_lambda - delta_sum) / delta_sum
};

/// Samples candidate-edge sets per size and measures the submodularity gap.
/// Per-edge increments are recomputed with the same evaluator, so single-edge
/// samples give theta = 0 exactly. Samples with delta_sum = 0 are skipped.
std::vector<ThetaSample> submodularity_experiment(const Eigen::SparseMatrix<double>& A,
                                                  const std::vector<CandidateEdge>& candidates,
                                                  const std::vector<int>& sizes, int trials,
                                                  const spectral::SpectralParams& params,
                                                  bool exact, std::uint64_t seed);

struct BoundRow {
  int k = 0;
  double lambda_old = 0.0;
  double lambda_new = 0.0;  // exact connectivity after the addition
  double estrada = 0.0;
  double general = 0.0;
  double path = 0.0;       // meaningful when the added edges form a simple path
  double increment = 0.0;  // lambda_old + top-k delta sum (heuristic, not sound)
};

/// Exact connectivity of A plus the added path against the three analytic
/// bounds (exact eigenvalues feed the bound formulas) and the increment
/// pseudo-bound derived from increment_topk_sum.
BoundRow bound_tightness_row(const Eigen::SparseMatrix<double>& A,
                             const std::vector<std::pair<std::int32_t, std::int32_t>>& added_path,
                             double increment_topk_sum);

std::string monotonicity_csv(const std::vector<MonotonicityPoint>& points);
std::string theta_csv(const std::vector<ThetaSample>& samples);
std::string bounds_csv(const std::vector<BoundRow>& rows);

}  // namespace buslink::eval
