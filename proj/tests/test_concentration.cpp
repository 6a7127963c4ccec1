#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tanlab/concentration.hpp"
#include "tanlab/estimator.hpp"
#include "tanlab/sampling.hpp"
#include "test_support.hpp"

using namespace tanlab;

namespace {

const double kNuRef = nu_bound_quad(5, 100, 10.0, CorrelationStructure::dense);

}  // namespace

TEST_CASE("chernoff lower tail closed form") {
  // Frozen at the reference point: 96 exp(-500 / (6 * 7.586...)).
  const double b = chernoff_lower_tail(5, 100, 10.0, kNuRef, 2000, 0.5);
  CHECK(b == doctest::Approx(1.6278416326e-3).epsilon(1e-8));
  CHECK(chernoff_lower_tail(5, 100, 10.0, kNuRef, 2000000, 0.5) < 1e-200);
  CHECK(chernoff_lower_tail(5, 100, 10.0, kNuRef, 10, 0.999999) == 1.0);  // clamped
  CHECK_THROWS_AS(chernoff_lower_tail(5, 100, 10.0, kNuRef, 10, 1.2),
                  std::invalid_argument);
}

TEST_CASE("chernoff upper tail closed form") {
  const double s2 = 2.0 * std::exp(1.0);
  const double b500 = chernoff_upper_tail(5, 100, 10.0, kNuRef, 500, s2,
                                          CorrelationStructure::dense);
  // Independent arithmetic: (n-m) exp(s2 RL K / R_D * (1 - log s2)).
  const long double rl = 95.0L * (5.0L * 29.0L * 100.0L / 180.0L);
  const long double rd = 0.25L * 95.0L * 25.0L * 100.0L;
  const long double expo = (long double)s2 * rl * 500.0L / rd *
                           (1.0L - logl((long double)s2));
  const long double expect = 95.0L * expl(expo);
  CHECK(b500 == doctest::Approx((double)expect).epsilon(1e-12));
  CHECK(chernoff_upper_tail(5, 100, 10.0, kNuRef, 1000, s2,
                            CorrelationStructure::dense) < b500);
  CHECK_THROWS_AS(chernoff_upper_tail(5, 100, 10.0, kNuRef, 10, std::exp(1.0),
                                      CorrelationStructure::dense),
                  std::invalid_argument);
}

TEST_CASE("bernstein tail closed form") {
  const double s3 = 2e-5;
  const double b = bernstein_tail(5, 100, 10.0, kNuRef, 2000, s3,
                                  CorrelationStructure::dense);
  const long double nu = kNuRef;
  const long double rsig = 25.0L * 100.0L / 12.0L * (95.0L * 29.0L / 15.0L);
  const long double rb = 0.5L * 5.0L * sqrtl(5.0L) * sqrtl(95.0L) * 10.0L;
  const long double denom = powl(nu, 6) * rsig + rb * powl(nu, 3) * (long double)s3 / 3.0L;
  const long double expect = 100.0L * expl(-((long double)s3 * s3 / 2.0L) * 2000.0L / denom);
  CHECK(b == doctest::Approx((double)std::min(1.0L, expect)).epsilon(1e-10));
  CHECK(bernstein_tail(5, 100, 10.0, kNuRef, 2000, 1.0, CorrelationStructure::dense) <
        1e-200);
  CHECK(bernstein_tail(5, 100, 10.0, kNuRef, 4000, s3, CorrelationStructure::dense) < b);
  CHECK(bernstein_tail(5, 100, 10.0, 2.0 * kNuRef, 2000, s3,
                       CorrelationStructure::dense) > b);
}

TEST_CASE("bernstein threshold solver hits the requested level") {
  for (double target : {0.25, 0.05}) {
    const double s3 = bernstein_s3_for_bound(5, 100, 10.0, kNuRef, 2000,
                                             CorrelationStructure::dense, target);
    const double back = bernstein_tail(5, 100, 10.0, kNuRef, 2000, s3,
                                       CorrelationStructure::dense);
    CHECK(back == doctest::Approx(target).epsilon(1e-10));
  }
}

TEST_CASE("block statistics agree with an explicit reconstruction of M^(K)") {
  const std::size_t m = 2, n = 7, K = 40;
  const EmbeddingSpec spec = make_embedding_spec(Family::quadratic, m, n, 6.0, 21);
  const SampleCloud cloud = sample_cloud(m, 0.1, K, 9, 1);
  const auto stats = detail::quadratic_block_stats(spec, cloud);

  const DataMatrix x = embed_cloud(spec, cloud);
  const Matrix cov = gram_outer(x, double(K));
  const auto eig = sym_eig(cov);
  CHECK(stats.lambda_m == doctest::Approx(eig.eigenvalues[m - 1]).epsilon(1e-10));

  Matrix d(n - m, n - m);
  for (std::size_t i = 0; i < n - m; ++i)
    for (std::size_t j = 0; j < n - m; ++j) d(i, j) = cov(m + i, m + j);
  CHECK(stats.rho_d == doctest::Approx(spectral_radius(d)).epsilon(1e-10));

  Matrix b(m, n - m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n - m; ++j) b(i, j) = cov(i, m + j);
  CHECK(stats.b_norm ==
        doctest::Approx(matrix_norms(b).operator_norm).epsilon(1e-10));
}

TEST_CASE("flat manifolds never trigger the curvature events") {
  TailBoundQuery q;
  q.m = 3;
  q.n = 20;
  q.kmax = 0.0;
  q.nu = 0.2;
  q.K = 50;
  q.s2 = 2.0 * std::exp(1.0);
  q.s3 = 1e-9;
  q.kind = TailKind::chernoff_upper;
  const auto upper = validate_tail_bounds(q, 120, 3);
  CHECK(upper.empirical_frequency == 0.0);
  q.kind = TailKind::bernstein;
  const auto bern = validate_tail_bounds(q, 120, 3);
  CHECK(bern.empirical_frequency == 0.0);
}

TEST_CASE("lower tail validation is sound at the reference point") {
  TailBoundQuery q;
  q.kind = TailKind::chernoff_lower;
  q.m = 5;
  q.n = 100;
  q.kmax = 10.0;
  q.nu = kNuRef;
  q.K = 2000;
  q.s1 = 0.5;
  const std::size_t reps = 200;
  const auto res = validate_tail_bounds(q, reps, 2024);
  CHECK(res.reps == reps);
  const double p = res.theoretical_bound;
  const double slack = 3.0 * std::sqrt(p * (1.0 - p) / double(reps));
  CHECK(res.empirical_frequency <= p + slack);
  // Frequencies are integer counts over reps.
  const double scaled = res.empirical_frequency * double(reps);
  CHECK(std::fabs(scaled - std::round(scaled)) < 1e-9);
  // Determinism.
  const auto again = validate_tail_bounds(q, reps, 2024);
  CHECK(again.empirical_frequency == res.empirical_frequency);
  CHECK_THROWS_AS(validate_tail_bounds(q, 50, 1), std::invalid_argument);
}

TEST_CASE("csv row shape") {
  TailBoundQuery q;
  q.kind = TailKind::bernstein;
  q.m = 5;
  q.n = 100;
  q.kmax = 10.0;
  q.nu = kNuRef;
  q.K = 2000;
  q.s3 = 1e-5;
  ValidationResult r;
  r.theoretical_bound = 0.2;
  r.empirical_frequency = 0.01;
  r.reps = 500;
  r.seed = 9;
  const std::string row = validation_csv_row(q, r);
  const std::string header = validation_csv_header();
  CHECK(row.rfind("bernstein,5,100,10,", 0) == 0);
  CHECK(header.rfind("kind,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') ==
        std::count(header.begin(), header.end(), ','));
}
