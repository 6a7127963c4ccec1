#pragma once

#include <cstdint>
#include <string>

#include "tanlab/bounds.hpp"
#include "tanlab/sampling.hpp"

namespace tanlab {

enum class TailKind { chernoff_lower, chernoff_upper, bernstein };

std::string tail_kind_name(TailKind k);
TailKind tail_kind_from_name(const std::string& name);

struct TailBoundQuery {
  TailKind kind = TailKind::chernoff_lower;
  std::size_t m = 0, n = 0;
  double kmax = 0.0;
  double nu = 0.0;
  std::size_t K = 0;
  CorrelationStructure structure = CorrelationStructure::dense;
  double s1 = 0.5;   // chernoff_lower threshold, in (0,1)
  double s2 = 0.0;   // chernoff_upper threshold, > e
  double s3 = 0.0;   // bernstein threshold, > 0
  double p = 0.01;   // failure budget carried for reporting
};

struct ValidationResult {
  double theoretical_bound = 0.0;
  double empirical_frequency = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

// P(lambda_m(M^K) <= s1 nu^2/3) <= (n-m+1) exp(-(1-s1)^2 K / (6 R_M))
double chernoff_lower_tail(std::size_t m, std::size_t n, double kmax, double nu,
                           std::size_t K, double s1);

// P(rho(D^K) >= s2 R L nu^4) <= (n-m) (e/s2)^(s2 R L K / R_D)
double chernoff_upper_tail(std::size_t m, std::size_t n, double kmax, double nu,
                           std::size_t K, double s2, CorrelationStructure structure);

// P(||B^K|| > s3) <= n exp(-(s3^2/2) K / (nu^6 R_sigma + R_B nu^3 s3 / 3))
double bernstein_tail(std::size_t m, std::size_t n, double kmax, double nu,
                      std::size_t K, double s3, CorrelationStructure structure);

// Measures the frequency of the bad event behind q.kind over `reps`
// independently sampled clouds on a quadratic embedding, and reports it
// against the theoretical bound. Reps run in parallel with per-rep derived
// seeds; the count aggregation is exact integer arithmetic.
ValidationResult validate_tail_bounds(const TailBoundQuery& q, std::size_t reps,
                                      std::uint64_t seed);

std::string validation_csv_header();
std::string validation_csv_row(const TailBoundQuery& q, const ValidationResult& r);

// The s3 at which the Bernstein bound equals `target` (closed form of the
// quadratic in s3). Useful where the protocol needs a threshold with a
// prescribed theoretical failure level.
double bernstein_s3_for_bound(std::size_t m, std::size_t n, double kmax, double nu,
                              std::size_t K, CorrelationStructure structure,
                              double target);

namespace detail {
// Block statistics of M^(K) for a quadratic axis-aligned embedding, computed
// through the exact monomial compression of the normal block.
struct BlockStats {
  double lambda_m = 0.0;  // m-th eigenvalue of M^(K)
  double rho_d = 0.0;     // spectral radius of the lower-right block
  double b_norm = 0.0;    // operator norm of the off-diagonal block
};
BlockStats quadratic_block_stats(const EmbeddingSpec& spec, const SampleCloud& cloud);
}  // namespace detail

}  // namespace tanlab
