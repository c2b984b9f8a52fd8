#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace buslink::spectral {

struct SpectralParams {
  int probes = 50;          // Hutchinson repetitions s
  int lanczos_steps = 10;   // Lanczos iterations t per probe
  std::uint64_t seed = 42;
  double epsilon = 0.01;    // target relative trace accuracy
  double delta = 0.05;      // failure probability budget
};

/// y = M x for a symmetric operator of dimension n.
using SymmetricOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

SymmetricOp matrix_op(const Eigen::SparseMatrix<double>& A);
/// Operator for A plus unit entries at the given (symmetric) extra edges.
SymmetricOp augmented_op(const Eigen::SparseMatrix<double>& A,
                         const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges);

/// Deterministic standard-normal probe for (seed, probe index); independent of
/// evaluation order and platform RNG details.
Eigen::VectorXd gaussian_probe(Eigen::Index n, std::uint64_t seed, std::uint64_t index);

/// v' exp(M) v via a t-step Lanczos tridiagonalization started at v/|v| with
/// full reorthogonalization; the small tridiagonal factor is exponentiated by
/// dense eigendecomposition. Breakdown (invariant subspace) truncates early
/// and the returned value is exact for the captured subspace.
double lanczos_quadform_exp(const SymmetricOp& op, Eigen::Index n, const Eigen::VectorXd& v,
                            int steps);
double lanczos_quadform_exp(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& v,
                            int steps);

/// Hutchinson estimate of tr(exp(M)): mean of `probes` Gaussian quadratic
/// forms, summed in probe order.
double estimate_trace_exp(const SymmetricOp& op, Eigen::Index n, const SpectralParams& params);
double estimate_trace_exp(const Eigen::SparseMatrix<double>& A, const SpectralParams& params);

/// Natural connectivity ln(tr(exp(A)) / n), estimated. An edgeless matrix is
/// exactly 0 and short-circuits the estimator.
double natural_connectivity(const Eigen::SparseMatrix<double>& A, const SpectralParams& params);
double natural_connectivity(const Eigen::SparseMatrix<double>& A,
                            const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges,
                            const SpectralParams& params);

/// Exact oracle via dense symmetric eigendecomposition; guarded to n <= 5000.
double natural_connectivity_exact(const Eigen::SparseMatrix<double>& A);
double natural_connectivity_exact(
    const Eigen::SparseMatrix<double>& A,
    const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges);

/// m algebraically largest eigenvalues via deflated restarted Lanczos with
/// full reorthogonalization. Throws ConvergenceError past the restart budget.
std::vector<double> top_eigenvalues(const Eigen::SparseMatrix<double>& A, int m,
                                    double residual_tol = 1e-9);

/// Eigenvalues 2 cos(i pi / (k+2)), i = 1..k+1, of the k-edge path graph.
std::vector<double> path_graph_eigenvalues(int k);

/// ln(1 + (e^sqrt(2(m+k)) - 1) / n): connectivity cap after adding k edges to
/// a graph with m edges and n vertices.
double estrada_upper_bound(std::int64_t m_edges, std::int64_t n, int k);

/// Bound after k arbitrary added edges given lambda(G) and the top-2k
/// eigenvalues: ln(e^lambda - (1/n) sum e^{lambda_i} + (e^{lambda_1}/n)(e^sqrt(2k) + 2k - 1)).
double general_upper_bound(double lambda_g, const std::vector<double>& top2k, int k,
                           std::int64_t n);

/// Bound after adding a k-edge simple path given the top floor((k+1)/2)
/// eigenvalues: ln(e^lambda + (1/n) sum (e^{sigma_i} - 1) e^{lambda_i}).
double path_upper_bound(double lambda_g, const std::vector<double>& top, int k, std::int64_t n);

double logsumexp(const std::vector<double>& xs);

}  // namespace buslink::spectral
