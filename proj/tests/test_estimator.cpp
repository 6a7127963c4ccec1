#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "tanlab/bounds.hpp"
#include "tanlab/estimator.hpp"
#include "test_support.hpp"

using namespace tanlab;
using namespace tanlab::testing;

namespace {

// Oracle: Frobenius norm of the explicit projector difference.
double projector_distance_naive(const Matrix& u, const Matrix& e) {
  const std::size_t n = u.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double pu = 0.0, pe = 0.0;
      for (std::size_t k = 0; k < u.cols(); ++k) pu += u(i, k) * u(j, k);
      for (std::size_t k = 0; k < e.cols(); ++k) pe += e(i, k) * e(j, k);
      acc += (pu - pe) * (pu - pe);
    }
  return std::sqrt(acc);
}

Matrix random_orthogonal(std::size_t m, Rng& rng) { return random_frame(m, m, rng); }

}  // namespace

TEST_CASE("flat subspace data recovers the tangent space exactly") {
  const EmbeddingSpec flat = make_embedding_spec(Family::quadratic, 5, 50, 0.0, 3);
  const auto cloud = sample_cloud(5, 0.4, 5, 8, 0);
  const auto est = local_pca(embed_cloud(flat, cloud), 5);
  CHECK(est.angle_radians < 1e-10);
  CHECK(est.u2_frobenius < 1e-12);
}

TEST_CASE("scaled canonical columns recover span{e_1..e_m}") {
  Matrix x(6, 3, 0.0);
  x(0, 0) = 2.5;
  x(1, 1) = -7.0;
  x(2, 2) = 0.25;
  const auto est = local_pca(x, 3);
  CHECK(est.angle_radians < 1e-12);
}

TEST_CASE("subspace_angle basics") {
  Rng rng(5);
  const Matrix u = random_frame(10, 3, rng);
  CHECK(subspace_angle(u, u) == doctest::Approx(0.0).epsilon(1e-12));

  Matrix diag(2, 1, 0.0);
  diag(0, 0) = 1.0 / std::sqrt(2.0);
  diag(1, 0) = 1.0 / std::sqrt(2.0);
  const Matrix e1 = detail::canonical_frame(2, 1);
  CHECK(subspace_angle(diag, e1) == doctest::Approx(std::numbers::pi / 4));

  Matrix ortho(8, 2, 0.0);
  ortho(4, 0) = 1.0;
  ortho(5, 1) = 1.0;
  const Matrix e2 = detail::canonical_frame(8, 2);
  CHECK(subspace_angle(ortho, e2) == doctest::Approx(std::numbers::pi / 2));

  Matrix bad(4, 2, 0.5);
  CHECK_THROWS_AS(subspace_angle(bad, detail::canonical_frame(4, 2)),
                  std::invalid_argument);
}

TEST_CASE("projection distance identities") {
  Rng rng(31);
  const Matrix e = detail::canonical_frame(12, 4);
  CHECK(projection_distance(e, e) == 0.0);

  Matrix ortho(12, 4, 0.0);
  for (int k = 0; k < 4; ++k) ortho(4 + k, k) = 1.0;
  CHECK(projection_distance(ortho, e) == doctest::Approx(std::sqrt(8.0)));

  for (int t = 0; t < 50; ++t) {
    const Matrix u = random_frame(12, 4, rng);
    double u2 = 0.0;
    for (std::size_t i = 4; i < 12; ++i)
      for (std::size_t j = 0; j < 4; ++j) u2 += u(i, j) * u(i, j);
    const double pd = projection_distance(u, e);
    CHECK(std::fabs(pd * pd - 2.0 * u2) < 1e-10);
    CHECK(std::fabs(pd - projector_distance_naive(u, e)) < 1e-10);
  }
}

TEST_CASE("angle bound follows from the U2 norm") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 6 + rng.next_below(20);
    const std::size_t m = 1 + rng.next_below(4);
    // Perturb the canonical frame so that ||U_2||_F stays below 1.
    Matrix u = detail::canonical_frame(n, m);
    const double scale = 0.3 * rng.next_unit();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) u(i, j) += scale * rng.next_symmetric(0.5);
    detail::orthonormalize_columns(u);
    double u2 = 0.0;
    for (std::size_t i = m; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) u2 += u(i, j) * u(i, j);
    const double u2f = std::sqrt(u2);
    if (u2f >= 1.0) continue;
    const double tau = std::min(0.999999, u2f * (1.0 + 1e-9) + 1e-12);
    const double angle = subspace_angle(u, detail::canonical_frame(n, m));
    CHECK(angle < angle_bound(tau, m, 0.0) + 1e-9);
  }
}

TEST_CASE("angle invariant to in-span rotations and data scaling") {
  Rng rng(13);
  const EmbeddingSpec spec = make_embedding_spec(Family::smooth2_sin, 3, 18, 6.0, 4);
  const auto cloud = sample_cloud(3, 0.05, 40, 21, 0);
  const auto x = embed_cloud(spec, cloud);
  const auto est = local_pca(x, 3);

  const Matrix q = random_orthogonal(3, rng);
  Matrix rotated(18, 3, 0.0);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        rotated(i, j) += est.basis(i, k) * q(k, j);
  const Matrix e = detail::canonical_frame(18, 3);
  CHECK(std::fabs(subspace_angle(rotated, e) - est.angle_radians) < 1e-10);

  Matrix scaled = x;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= 37.5;
  CHECK(std::fabs(local_pca(scaled, 3).angle_radians - est.angle_radians) < 1e-10);
}

TEST_CASE("basis satisfies the block orthogonality identity") {
  // U1^T U1 + U2^T U2 = I for any orthonormal n x m frame split at row m.
  const EmbeddingSpec spec = make_embedding_spec(Family::smooth1_exp, 4, 25, 5.0, 9);
  const auto est = local_pca(embed_cloud(spec, sample_cloud(4, 0.03, 60, 2, 1)), 4);
  Matrix sum(4, 4, 0.0);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        sum(a, b) += est.basis(i, a) * est.basis(i, b);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      CHECK(std::fabs(sum(a, b) - (a == b ? 1.0 : 0.0)) < 1e-9);
  CHECK(std::fabs(est.projection_distance * est.projection_distance -
                  2.0 * est.u2_frobenius * est.u2_frobenius) < 1e-9);
}

TEST_CASE("errors and edge shapes") {
  CHECK_THROWS_WITH_AS(local_pca(Matrix(10, 3, 1.0), 4),
                       doctest::Contains("need at least m samples"),
                       std::invalid_argument);
  // K < n: trailing eigenvalues are exact zeros.
  Rng rng(3);
  const Matrix x = random_matrix(30, 8, rng);
  const auto est = local_pca(x, 2);
  CHECK(est.eigenvalues.size() == 30);
  for (std::size_t i = 8; i < 30; ++i) CHECK(est.eigenvalues[i] == 0.0);
  CHECK(orthonormality_error(est.basis) < 1e-10);
}

TEST_CASE("degenerate spectrum gap is flagged") {
  const auto est = local_pca(Matrix::identity(4), 2);
  CHECK(est.degenerate_gap);
}

TEST_CASE("eigenvalue separation for an admissible quadratic width") {
  const std::size_t m = 5, n = 100;
  const EmbeddingSpec spec = make_embedding_spec(Family::quadratic, m, n, 10.0, 6);
  const double nu =
      0.9 * nu_bound_quad(m, n, 10.0, CorrelationStructure::dense);
  const auto est = estimate_tangent(spec, sample_cloud(m, nu, 20000, 8, 0));
  CHECK(est.eigenvalues[m - 1] > est.eigenvalues[m]);
  CHECK_FALSE(est.degenerate_gap);
}

TEST_CASE("reduced route equals the direct route") {
  for (Family fam : {Family::quadratic, Family::smooth3_poly}) {
    const EmbeddingSpec spec = make_embedding_spec(fam, 3, 20, 8.0, 15);
    const auto cloud = sample_cloud(3, 0.02, 60, 33, 2);
    const auto direct = local_pca(embed_cloud(spec, cloud), 3);
    const auto reduced = detail::estimate_tangent_reduced(spec, cloud);
    CHECK(std::fabs(direct.angle_radians - reduced.angle_radians) < 1e-9);
    CHECK(std::fabs(direct.u2_frobenius - reduced.u2_frobenius) < 1e-9);
    CHECK(std::fabs(direct.projection_distance - reduced.projection_distance) < 1e-9);
    const double top = std::max(direct.eigenvalues[0], 1e-300);
    for (std::size_t i = 0; i < 20; ++i)
      CHECK(std::fabs(direct.eigenvalues[i] - reduced.eigenvalues[i]) <= 1e-10 * top);
    // Same top-m span.
    CHECK(subspace_angle(direct.basis, reduced.basis) < 1e-7);
  }
}

TEST_CASE("reduced route equals the direct route at experiment scale") {
  const std::size_t m = 5, n = 100, K = 2000;
  const EmbeddingSpec spec = make_embedding_spec(Family::quadratic, m, n, 10.0, 51);
  const double nbq = nu_bound_quad(m, n, 10.0, CorrelationStructure::dense);
  for (double gamma : {1.2, 4.0}) {
    for (std::size_t trial = 0; trial < 6; ++trial) {
      const auto cloud = sample_cloud(m, gamma * nbq, K, 400 + trial, trial);
      const auto direct = local_pca(embed_cloud(spec, cloud), m);
      const auto reduced = detail::estimate_tangent_reduced(spec, cloud);
      CHECK(std::fabs(direct.angle_radians - reduced.angle_radians) < 1e-8);
      CHECK(std::fabs(direct.u2_frobenius - reduced.u2_frobenius) < 1e-8);
      for (std::size_t i = 0; i < 12; ++i)
        CHECK(std::fabs(direct.eigenvalues[i] - reduced.eigenvalues[i]) <=
              1e-9 * direct.eigenvalues[0]);
    }
  }
}

TEST_CASE("estimate_tangent dispatch matches local_pca for transcendental maps") {
  const EmbeddingSpec spec = make_embedding_spec(Family::smooth1_exp, 2, 12, 4.0, 19);
  const auto cloud = sample_cloud(2, 0.05, 30, 5, 0);
  const auto a = estimate_tangent(spec, cloud);
  const auto b = local_pca(embed_cloud(spec, cloud), 2);
  CHECK(a.angle_radians == doctest::Approx(b.angle_radians).epsilon(1e-12));
}

TEST_CASE("large covariance side goes through the tridiagonal solver") {
  // n above the Jacobi crossover; compare against the thin SVD route.
  const std::size_t n = 410, K = 450, m = 4;
  const EmbeddingSpec spec = make_embedding_spec(Family::smooth2_sin, m, n, 10.0, 77);
  const double nu = 0.5 * nu_bound_quad(m, n, 10.0, CorrelationStructure::dense);
  const auto x = embed_cloud(spec, sample_cloud(m, nu, K, 3, 0));
  const auto est = local_pca(x, m);
  CHECK(orthonormality_error(est.basis) < 1e-9);

  Matrix scaled = x;
  const double inv = 1.0 / std::sqrt(double(K));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < K; ++j) scaled(i, j) *= inv;
  const auto svd = thin_svd(scaled);
  for (std::size_t i = 0; i < 10; ++i) {
    const double s2 = svd.singular_values[i] * svd.singular_values[i];
    CHECK(std::fabs(est.eigenvalues[i] - s2) <= 1e-8 * est.eigenvalues[0]);
  }
  Matrix top(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) top(i, j) = svd.left_vectors(i, j);
  CHECK(subspace_angle(est.basis, top) < 1e-7);
}

TEST_CASE("zero data matrix falls back to the canonical frame") {
  const auto est = local_pca(Matrix(12, 6, 0.0), 3);
  CHECK(est.angle_radians == doctest::Approx(0.0));
  CHECK(orthonormality_error(est.basis) < 1e-12);
  for (double v : est.eigenvalues) CHECK(v == 0.0);
}
