#include <doctest.h>

#include <chrono>
#include <cmath>

#include "buslink/errors.hpp"
#include "buslink/spectral.hpp"
#include "buslink/synth.hpp"
#include "support/oracles.hpp"
#include "support/testnets.hpp"

using namespace buslink;
using testsupport::adjacency_from_edges;

TEST_CASE("lanczos quadform: zero matrix returns v'v") {
  Eigen::SparseMatrix<double> Z(4, 4);
  Eigen::VectorXd v(4);
  v << 1, -2, 3, 0.5;
  CHECK(spectral::lanczos_quadform_exp(Z, v, 10) ==
        doctest::Approx(v.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("lanczos quadform: K2 with the all-ones probe gives 2e") {
  const auto K2 = testsupport::complete_graph(2);
  Eigen::VectorXd v(2);
  v << 1, 1;
  // exp(A) = [[cosh 1, sinh 1], [sinh 1, cosh 1]], so v' exp(A) v = 2 e.
  CHECK(spectral::lanczos_quadform_exp(K2, v, 5) ==
        doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("lanczos quadform: full-depth run matches the dense oracle") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n = 12 + static_cast<int>(seed);
    const auto A = synth::random_connected_adjacency(n, 3.0, seed);
    const Eigen::VectorXd v = spectral::gaussian_probe(n, 99, seed);
    const double got = spectral::lanczos_quadform_exp(A, v, n);
    const double want = testsupport::dense_quadform_exp(testsupport::densify(A), v);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("lanczos quadform: zero probe vector is rejected") {
  const auto K2 = testsupport::complete_graph(2);
  CHECK_THROWS_AS(spectral::lanczos_quadform_exp(K2, Eigen::VectorXd::Zero(2), 5), ConfigError);
}

TEST_CASE("trace estimate: zero matrix, expectation n") {
  Eigen::SparseMatrix<double> Z(5, 5);
  spectral::SpectralParams p;
  p.probes = 10000;
  p.seed = 42;
  CHECK(spectral::estimate_trace_exp(Z, p) == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("trace estimate: K3 within 1% at the default budget (fixed seed)") {
  const auto K3 = testsupport::complete_graph(3);
  spectral::SpectralParams p;  // s=50, t=10
  p.seed = 62;
  const double exact = std::exp(2.0) + 2.0 * std::exp(-1.0);  // 8.124815
  CHECK(exact == doctest::Approx(8.124815).epsilon(1e-6));
  CHECK(spectral::estimate_trace_exp(K3, p) == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("trace estimate: same seed twice is bit-identical") {
  const auto A = synth::random_connected_adjacency(60, 2.5, 7);
  spectral::SpectralParams p;
  p.seed = 123;
  const double a = spectral::estimate_trace_exp(A, p);
  const double b = spectral::estimate_trace_exp(A, p);
  CHECK(a == b);
}

TEST_CASE("natural connectivity: edgeless graph is exactly zero") {
  Eigen::SparseMatrix<double> Z(7, 7);
  spectral::SpectralParams p;
  CHECK(spectral::natural_connectivity(Z, p) == 0.0);
  CHECK(spectral::natural_connectivity_exact(Z) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("natural connectivity: empty vertex set is an error") {
  Eigen::SparseMatrix<double> E(0, 0);
  spectral::SpectralParams p;
  CHECK_THROWS_AS(spectral::natural_connectivity(E, p), ConfigError);
  CHECK_THROWS_AS(spectral::natural_connectivity_exact(E), ConfigError);
}

TEST_CASE("natural connectivity: K2 closed form ln(cosh 1)") {
  const auto K2 = testsupport::complete_graph(2);
  CHECK(spectral::natural_connectivity_exact(K2) ==
        doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-12));
}

TEST_CASE("natural connectivity: K3 closed form") {
  const auto K3 = testsupport::complete_graph(3);
  const double want = std::log((std::exp(2.0) + 2.0 * std::exp(-1.0)) / 3.0);  // 0.996311
  CHECK(want == doctest::Approx(0.99631).epsilon(1e-4));
  CHECK(spectral::natural_connectivity_exact(K3) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("natural connectivity: star closed form") {
  // S_3 spectrum {sqrt 3, 0, 0, -sqrt 3}.
  const auto S = testsupport::star_graph(3);
  const double r = std::sqrt(3.0);
  const double want = std::log((std::exp(r) + 2.0 + std::exp(-r)) / 4.0);
  CHECK(spectral::natural_connectivity_exact(S) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("natural connectivity: estimator agrees with the exact oracle within epsilon") {
  // 20 random transit-like graphs, n <= 500. The probe budget is sized so the
  // additive estimator error stays inside epsilon = 0.01 with margin.
  spectral::SpectralParams p;
  p.probes = 3000;
  p.lanczos_steps = 12;
  for (int g = 0; g < 20; ++g) {
    const int n = 200 + 15 * g;
    const auto A = synth::random_connected_adjacency(n, 2.4, 500 + g);
    p.seed = 11 + static_cast<std::uint64_t>(g);
    const double est = spectral::natural_connectivity(A, p);
    const double exact = spectral::natural_connectivity_exact(A);
    CHECK(std::abs(est - exact) <= p.epsilon);
  }
}

TEST_CASE("natural connectivity: exact oracle matches the independent dense path") {
  for (std::uint64_t seed = 3; seed <= 8; ++seed) {
    const auto A = synth::random_connected_adjacency(40, 2.8, seed);
    CHECK(spectral::natural_connectivity_exact(A) ==
          doctest::Approx(testsupport::dense_natural_connectivity(testsupport::densify(A)))
              .epsilon(1e-12));
  }
}

TEST_CASE("natural connectivity: dense guard rejects oversized input") {
  Eigen::SparseMatrix<double> big(5001, 5001);
  CHECK_THROWS_AS(spectral::natural_connectivity_exact(big), SizeError);
}

TEST_CASE("natural connectivity: monotone under edge addition (exact)") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto A = synth::random_connected_adjacency(30, 2.5, seed);
    const double base = spectral::natural_connectivity_exact(A);
    const auto extra = synth::sample_new_edges(A, 1, seed);
    REQUIRE(!extra.empty());
    CHECK(spectral::natural_connectivity_exact(A, extra) > base);
  }
}

TEST_CASE("top eigenvalues: K3 and the star") {
  const auto K3 = testsupport::complete_graph(3);
  const auto top1 = spectral::top_eigenvalues(K3, 1);
  CHECK(top1[0] == doctest::Approx(2.0).epsilon(1e-10));
  const auto top3 = spectral::top_eigenvalues(K3, 3);
  CHECK(top3[1] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(top3[2] == doctest::Approx(-1.0).epsilon(1e-10));

  const auto S = testsupport::star_graph(3);
  const auto top2 = spectral::top_eigenvalues(S, 2);
  CHECK(top2[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK(top2[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("top eigenvalues: random n=200, m=10 matches the dense solver to 1e-8") {
  const auto A = synth::random_connected_adjacency(200, 3.0, 31);
  const auto top = spectral::top_eigenvalues(A, 10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testsupport::densify(A),
                                                    Eigen::EigenvaluesOnly);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(top[static_cast<std::size_t>(i)] - es.eigenvalues()[199 - i]) <= 1e-8);
  }
}

TEST_CASE("top eigenvalues: argument validation") {
  const auto K3 = testsupport::complete_graph(3);
  CHECK_THROWS_AS(spectral::top_eigenvalues(K3, 0), ConfigError);
  CHECK_THROWS_AS(spectral::top_eigenvalues(K3, 4), ConfigError);
}

TEST_CASE("path graph eigenvalues: closed forms and dense agreement") {
  const auto s1 = spectral::path_graph_eigenvalues(1);
  REQUIRE(s1.size() == 2);
  CHECK(s1[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s1[1] == doctest::Approx(-1.0).epsilon(1e-12));

  const auto s2 = spectral::path_graph_eigenvalues(2);
  REQUIRE(s2.size() == 3);
  CHECK(s2[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(s2[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s2[2] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));

  for (int k = 1; k <= 6; ++k) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < k; ++i) edges.emplace_back(i, i + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        testsupport::densify(adjacency_from_edges(k + 1, edges)), Eigen::EigenvaluesOnly);
    const auto sigma = spectral::path_graph_eigenvalues(k);
    for (int i = 0; i <= k; ++i) {
      CHECK(sigma[static_cast<std::size_t>(i)] ==
            doctest::Approx(es.eigenvalues()[k - i]).epsilon(1e-10));
    }
  }

  CHECK_THROWS_AS(spectral::path_graph_eigenvalues(0), ConfigError);
}

TEST_CASE("estimator is scheduling-independent: probe streams are counter-based") {
  // Probe i must not depend on how many probes were drawn before it.
  const auto v1 = spectral::gaussian_probe(16, 9, 3);
  const auto v2 = spectral::gaussian_probe(16, 9, 3);
  CHECK(v1 == v2);
  const auto other = spectral::gaussian_probe(16, 9, 4);
  CHECK(v1 != other);
}

TEST_CASE("estimate runs are fast at the default budget") {
  const auto A = synth::random_connected_adjacency(500, 2.4, 5);
  spectral::SpectralParams p;
  const auto t0 = std::chrono::steady_clock::now();
  (void)spectral::natural_connectivity(A, p);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(sec < 1.0);
}
