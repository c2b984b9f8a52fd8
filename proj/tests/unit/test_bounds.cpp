#include <doctest.h>

#include <cmath>

#include "buslink/errors.hpp"
#include "buslink/eval.hpp"
#include "buslink/spectral.hpp"
#include "buslink/synth.hpp"
#include "support/oracles.hpp"
#include "support/testnets.hpp"

using namespace buslink;

TEST_CASE("estrada bound: degenerate single-vertex case") {
  CHECK(spectral::estrada_upper_bound(0, 1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("estrada bound: two vertices, one added edge") {
  const double want = std::log(1.0 + (std::exp(std::sqrt(2.0)) - 1.0) / 2.0);  // 0.938689
  CHECK(want == doctest::Approx(0.93869).epsilon(1e-4));
  CHECK(spectral::estrada_upper_bound(0, 2, 1) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("estrada bound: stable for large edge counts") {
  const double b = spectral::estrada_upper_bound(400000, 12000, 30);
  CHECK(std::isfinite(b));
  // ln(1 + (e^s - 1)/n) ~ s - ln n for large s.
  const double s = std::sqrt(2.0 * 400030.0);
  CHECK(b == doctest::Approx(s - std::log(12000.0)).epsilon(1e-6));
}

TEST_CASE("general bound: two isolated vertices, one edge") {
  // lambda = 0, top-2 spectrum {0, 0}:
  // ln(1 - 1 + (e^sqrt(2) + 1)/2) = 0.938689.
  const double got = spectral::general_upper_bound(0.0, {0.0, 0.0}, 1, 2);
  CHECK(got == doctest::Approx(0.93869).epsilon(1e-4));
}

TEST_CASE("general bound: k = 0 returns lambda exactly") {
  CHECK(spectral::general_upper_bound(0.7321, {}, 0, 10) == 0.7321);
  CHECK_THROWS_AS(spectral::general_upper_bound(0.7, {0.1}, 0, 10), ConfigError);
}

TEST_CASE("general bound: spectrum length must match min(2k, n)") {
  CHECK_THROWS_AS(spectral::general_upper_bound(0.5, {0.1, 0.2, 0.3}, 1, 10), ConfigError);
}

TEST_CASE("path bound: two isolated vertices, one edge") {
  // sigma_1 = 1, so ln(1 + (e - 1)/2) = 0.620115.
  const double got = spectral::path_upper_bound(0.0, {0.0}, 1, 2);
  CHECK(got == doctest::Approx(0.62011).epsilon(1e-4));
}

TEST_CASE("path bound is tighter than the general bound on the toy instance") {
  const double path = spectral::path_upper_bound(0.0, {0.0}, 1, 2);
  const double general = spectral::general_upper_bound(0.0, {0.0, 0.0}, 1, 2);
  CHECK(path < general);
}

TEST_CASE("path bound: k = 0 and validation") {
  CHECK(spectral::path_upper_bound(0.4, {}, 0, 5) == 0.4);
  CHECK_THROWS_AS(spectral::path_upper_bound(0.4, {0.1, 0.2}, 1, 5), ConfigError);
  CHECK_THROWS_AS(spectral::path_upper_bound(0.4, {0.1}, 5, 3), ConfigError);  // needs k+1 <= n
}

TEST_CASE("bound soundness: random single-edge additions never beat the Estrada bound") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int n = 10 + static_cast<int>(seed % 30);
    const auto A = synth::random_connected_adjacency(n, 2.6, seed);
    const auto extra = synth::sample_new_edges(A, 1, seed + 1000);
    if (extra.empty()) continue;
    const double after = spectral::natural_connectivity_exact(A, extra);
    const double bound =
        spectral::estrada_upper_bound(static_cast<std::int64_t>(A.nonZeros() / 2), n, 1);
    CHECK(after <= bound + 1e-9);
  }
}

TEST_CASE("bound soundness: general and path bounds dominate exact additions") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int n = 12 + static_cast<int>(seed % 40);
    const int k = 1 + static_cast<int>(seed % 4);
    const auto A = synth::random_connected_adjacency(n, 2.6, seed * 3);
    const auto path = synth::sample_new_path(A, k, seed * 7);
    if (path.empty()) continue;
    const auto row = eval::bound_tightness_row(A, path, 0.0);
    CHECK(row.lambda_new <= row.general + 1e-9);
    CHECK(row.lambda_new <= row.path + 1e-9);
    CHECK(row.lambda_new <= row.estrada + 1e-9);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("bound tightness row: k = 0 collapses every bound to lambda(G)") {
  const auto A = synth::random_connected_adjacency(20, 2.5, 4);
  const auto row = eval::bound_tightness_row(A, {}, 0.0);
  CHECK(row.general == doctest::Approx(row.lambda_old).epsilon(1e-12));
  CHECK(row.path == doctest::Approx(row.lambda_old).epsilon(1e-12));
  CHECK(row.increment == doctest::Approx(row.lambda_old).epsilon(1e-12));
  CHECK(row.lambda_new == doctest::Approx(row.lambda_old).epsilon(1e-12));
  CHECK(row.estrada >= row.lambda_old - 1e-9);
}
