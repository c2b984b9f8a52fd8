#include "buslink/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "buslink/errors.hpp"

namespace buslink::spectral {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform in (0, 1]; avoids stdlib distribution variance.
struct ProbeRng {
  std::uint64_t state;
  explicit ProbeRng(std::uint64_t s) : state(s) {}
  std::uint64_t next_u64() {
    state = splitmix64(state);
    return state;
  }
  double next_unit() {
    // 53-bit mantissa, shifted into (0, 1].
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }
};

}  // namespace

Eigen::VectorXd gaussian_probe(Eigen::Index n, std::uint64_t seed, std::uint64_t index) {
  ProbeRng rng(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
  Eigen::VectorXd v(n);
  Eigen::Index i = 0;
  while (i < n) {
    // Box-Muller; each uniform pair yields two normals.
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i++] = r * std::cos(2.0 * kPi * u2);
    if (i < n) v[i++] = r * std::sin(2.0 * kPi * u2);
  }
  return v;
}

SymmetricOp matrix_op(const Eigen::SparseMatrix<double>& A) {
  return [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = A * x; };
}

SymmetricOp augmented_op(const Eigen::SparseMatrix<double>& A,
                         const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges) {
  return [&A, extra_edges](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.noalias() = A * x;
    for (const auto& [u, v] : extra_edges) {
      y[u] += x[v];
      y[v] += x[u];
    }
  };
}

double lanczos_quadform_exp(const SymmetricOp& op, Eigen::Index n, const Eigen::VectorXd& v,
                            int steps) {
  if (n <= 0) throw ConfigError("lanczos_quadform_exp: empty operator");
  if (steps < 1) throw ConfigError("lanczos_quadform_exp: steps must be >= 1");
  const double vnorm = v.norm();
  if (!(vnorm > 0.0)) throw ConfigError("lanczos_quadform_exp: zero probe vector");

  const int t = static_cast<int>(std::min<Eigen::Index>(steps, n));
  Eigen::MatrixXd V(n, t);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(t);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(t);  // beta[j] couples j and j+1
  V.col(0) = v / vnorm;

  int dims = t;
  Eigen::VectorXd w(n);
  for (int j = 0; j < t; ++j) {
    op(V.col(j), w);
    alpha[j] = V.col(j).dot(w);
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
    }
    if (j + 1 == t) break;
    beta[j] = w.norm();
    const double scale = std::max(1.0, alpha.head(j + 1).cwiseAbs().maxCoeff());
    if (beta[j] <= 1e-13 * scale) {
      dims = j + 1;  // invariant subspace: quadrature is exact from here
      break;
    }
    V.col(j + 1) = w / beta[j];
  }

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dims, dims);
  for (int j = 0; j < dims; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < dims) {
      T(j, j + 1) = beta[j];
      T(j + 1, j) = beta[j];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const auto& theta = es.eigenvalues();
  const auto& U = es.eigenvectors();
  double quad = 0.0;
  for (int j = 0; j < dims; ++j) {
    const double first = U(0, j);
    quad += first * first * std::exp(theta[j]);
  }
  return vnorm * vnorm * quad;
}

double lanczos_quadform_exp(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& v,
                            int steps) {
  return lanczos_quadform_exp(matrix_op(A), A.rows(), v, steps);
}

double estimate_trace_exp(const SymmetricOp& op, Eigen::Index n, const SpectralParams& params) {
  if (params.probes < 1) throw ConfigError("estimate_trace_exp: probes must be >= 1");
  double acc = 0.0;
  for (int i = 0; i < params.probes; ++i) {
    const Eigen::VectorXd v = gaussian_probe(n, params.seed, static_cast<std::uint64_t>(i));
    acc += lanczos_quadform_exp(op, n, v, params.lanczos_steps);
  }
  return acc / params.probes;
}

double estimate_trace_exp(const Eigen::SparseMatrix<double>& A, const SpectralParams& params) {
  return estimate_trace_exp(matrix_op(A), A.rows(), params);
}

double natural_connectivity(const Eigen::SparseMatrix<double>& A, const SpectralParams& params) {
  return natural_connectivity(A, {}, params);
}

double natural_connectivity(const Eigen::SparseMatrix<double>& A,
                            const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges,
                            const SpectralParams& params) {
  const Eigen::Index n = A.rows();
  if (n == 0) throw ConfigError("natural_connectivity: empty graph has no vertex set");
  if (A.nonZeros() == 0 && extra_edges.empty()) return 0.0;  // tr(exp(0)) = n exactly
  const double gamma =
      extra_edges.empty()
          ? estimate_trace_exp(A, params)
          : estimate_trace_exp(augmented_op(A, extra_edges), n, params);
  return std::log(gamma / static_cast<double>(n));
}

namespace {

double connectivity_from_eigenvalues(const Eigen::VectorXd& lambdas) {
  std::vector<double> xs(lambdas.data(), lambdas.data() + lambdas.size());
  return logsumexp(xs) - std::log(static_cast<double>(lambdas.size()));
}

}  // namespace

double natural_connectivity_exact(const Eigen::SparseMatrix<double>& A) {
  return natural_connectivity_exact(A, {});
}

double natural_connectivity_exact(
    const Eigen::SparseMatrix<double>& A,
    const std::vector<std::pair<std::int32_t, std::int32_t>>& extra_edges) {
  const Eigen::Index n = A.rows();
  if (n == 0) throw ConfigError("natural_connectivity_exact: empty graph");
  if (n > 5000) {
    throw SizeError("natural_connectivity_exact: n = " + std::to_string(n) +
                    " exceeds the dense guard (5000)");
  }
  Eigen::MatrixXd D(A);
  for (const auto& [u, v] : extra_edges) {
    D(u, v) += 1.0;
    D(v, u) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  return connectivity_from_eigenvalues(es.eigenvalues());
}

std::vector<double> top_eigenvalues(const Eigen::SparseMatrix<double>& A, int m,
                                    double residual_tol) {
  const Eigen::Index n = A.rows();
  if (m < 1 || static_cast<Eigen::Index>(m) > n) {
    throw ConfigError("top_eigenvalues: m must satisfy 1 <= m <= n");
  }
  const SymmetricOp op = matrix_op(A);

  std::vector<double> converged_values;
  std::vector<Eigen::VectorXd> converged_vectors;
  Eigen::VectorXd next_start;  // best unconverged Ritz vector of the last sweep
  const double inf = std::numeric_limits<double>::infinity();
  // Largest Ritz value left unaccepted by the previous sweep; +inf while the
  // deflated complement is unexplored. Termination needs m accepted values AND
  // a sweep showing the complement cannot beat the m-th of them.
  double complement_max = inf;

  const auto mth_value = [&]() {
    std::vector<double> sorted = converged_values;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    return sorted[static_cast<std::size_t>(m) - 1];
  };

  const int max_restarts = 40 + 12 * m;
  bool certified = false;
  for (int restart = 0; restart < max_restarts; ++restart) {
    if (static_cast<int>(converged_values.size()) >= m &&
        complement_max <= mth_value() + 1e-12) {
      certified = true;
      break;
    }
    const Eigen::Index remaining = n - static_cast<Eigen::Index>(converged_vectors.size());
    if (remaining <= 0) {
      certified = static_cast<int>(converged_values.size()) >= m;
      break;
    }
    const int sweep =
        static_cast<int>(std::min<Eigen::Index>(remaining, std::max(2 * m + 30, 100)));

    auto deflate = [&](Eigen::VectorXd& x) {
      for (const auto& c : converged_vectors) x -= c.dot(x) * c;
    };
    Eigen::VectorXd q = next_start.size() == n
                            ? next_start
                            : gaussian_probe(n, 0x70D0'5EEDULL, static_cast<std::uint64_t>(restart));
    next_start.resize(0);
    deflate(q);
    double qn = q.norm();
    if (qn <= 1e-10) {
      q = gaussian_probe(n, 0xF00D'5EEDULL, static_cast<std::uint64_t>(restart));
      deflate(q);
      qn = q.norm();
      if (qn <= 1e-12) continue;
    }
    q /= qn;

    Eigen::MatrixXd V(n, sweep);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(sweep);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(sweep);
    V.col(0) = q;
    int dims = sweep;
    bool breakdown = false;
    Eigen::VectorXd w(n);
    for (int j = 0; j < sweep; ++j) {
      op(V.col(j), w);
      alpha[j] = V.col(j).dot(w);
      w -= alpha[j] * V.col(j);
      if (j > 0) w -= beta[j - 1] * V.col(j - 1);
      deflate(w);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
      }
      beta[j] = w.norm();  // beta[dims-1] is the final-step residual norm
      if (beta[j] <= 1e-13 * std::max(1.0, std::abs(alpha[j]))) {
        dims = j + 1;
        breakdown = true;
        break;
      }
      if (j + 1 < sweep) V.col(j + 1) = w / beta[j];
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dims, dims);
    for (int j = 0; j < dims; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < dims) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double tail_beta = breakdown ? 0.0 : beta[dims - 1];
    // Accept only the converged prefix of the top Ritz values; anything below
    // the first unconverged value may shadow a missed eigenvalue.
    complement_max = inf;
    for (int j = dims - 1; j >= 0; --j) {
      const double theta = es.eigenvalues()[j];
      const double resid = breakdown ? 0.0 : std::abs(tail_beta * es.eigenvectors()(dims - 1, j));
      if (resid <= residual_tol * std::max(1.0, std::abs(theta))) {
        Eigen::VectorXd ritz = V.leftCols(dims) * es.eigenvectors().col(j);
        const double rn = ritz.norm();
        if (rn > 1e-12) {
          converged_values.push_back(theta);
          converged_vectors.push_back(ritz / rn);
        }
      } else {
        // Warm-start the next sweep on the best Ritz pair still in flight.
        next_start = V.leftCols(dims) * es.eigenvectors().col(j);
        complement_max = theta;
        break;
      }
    }
  }

  if (!certified || static_cast<int>(converged_values.size()) < m) {
    throw ConvergenceError("top_eigenvalues: only " + std::to_string(converged_values.size()) +
                           " of " + std::to_string(m) + " eigenvalues converged");
  }
  std::sort(converged_values.begin(), converged_values.end(), std::greater<double>());
  converged_values.resize(static_cast<std::size_t>(m));
  return converged_values;
}

std::vector<double> path_graph_eigenvalues(int k) {
  if (k < 1) throw ConfigError("path_graph_eigenvalues: k must be >= 1");
  std::vector<double> sigma;
  sigma.reserve(static_cast<std::size_t>(k) + 1);
  for (int i = 1; i <= k + 1; ++i) {
    sigma.push_back(2.0 * std::cos(static_cast<double>(i) * kPi / (k + 2)));
  }
  return sigma;
}

double estrada_upper_bound(std::int64_t m_edges, std::int64_t n, int k) {
  if (n < 1) throw ConfigError("estrada_upper_bound: n must be >= 1");
  if (m_edges + k < 0) throw ConfigError("estrada_upper_bound: negative edge total");
  const double s = std::sqrt(2.0 * static_cast<double>(m_edges + k));
  // ln(1 + (e^s - 1)/n) = logsumexp(ln(n - 1), s) - ln(n), stable for large s.
  if (n == 1) return s;
  return logsumexp({std::log(static_cast<double>(n - 1)), s}) -
         std::log(static_cast<double>(n));
}

double general_upper_bound(double lambda_g, const std::vector<double>& top2k, int k,
                           std::int64_t n) {
  if (n < 1) throw ConfigError("general_upper_bound: n must be >= 1");
  if (k < 0) throw ConfigError("general_upper_bound: k must be >= 0");
  if (k == 0) {
    if (!top2k.empty()) throw ConfigError("general_upper_bound: expected empty spectrum for k=0");
    return lambda_g;
  }
  const auto expected = static_cast<std::size_t>(std::min<std::int64_t>(2 * k, n));
  if (top2k.size() != expected) {
    throw ConfigError("general_upper_bound: expected " + std::to_string(expected) +
                      " eigenvalues, got " + std::to_string(top2k.size()));
  }
  const double nn = static_cast<double>(n);
  double sum_exp = 0.0;
  for (double l : top2k) sum_exp += std::exp(l);
  const double inner = std::exp(lambda_g) - sum_exp / nn +
                       std::exp(top2k.front()) / nn * (std::exp(std::sqrt(2.0 * k)) + 2.0 * k - 1.0);
  if (!(inner > 0.0)) {
    throw ConfigError("general_upper_bound: inconsistent lambda/spectrum input");
  }
  return std::log(inner);
}

double path_upper_bound(double lambda_g, const std::vector<double>& top, int k, std::int64_t n) {
  if (n < 1) throw ConfigError("path_upper_bound: n must be >= 1");
  if (k < 0) throw ConfigError("path_upper_bound: k must be >= 0");
  if (k == 0) {
    if (!top.empty()) throw ConfigError("path_upper_bound: expected empty spectrum for k=0");
    return lambda_g;
  }
  if (n < static_cast<std::int64_t>(k) + 1) {
    throw ConfigError("path_upper_bound: a k-edge simple path needs k+1 vertices");
  }
  const auto need = static_cast<std::size_t>((k + 1) / 2);
  if (top.size() != need) {
    throw ConfigError("path_upper_bound: expected " + std::to_string(need) +
                      " eigenvalues, got " + std::to_string(top.size()));
  }
  const std::vector<double> sigma = path_graph_eigenvalues(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < need; ++i) {
    sum += (std::exp(sigma[i]) - 1.0) * std::exp(top[i]);
  }
  return std::log(std::exp(lambda_g) + sum / static_cast<double>(n));
}

double logsumexp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

}  // namespace buslink::spectral
