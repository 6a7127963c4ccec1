#pragma once

#include <cstdint>
#include <string>

#include "tanlab/manifold.hpp"
#include "tanlab/matrix.hpp"

namespace tanlab {

enum class CorrelationStructure { dense, diagonal };

std::string structure_name(CorrelationStructure s);
CorrelationStructure structure_from_name(const std::string& name);

// R = n-m for dense correlation, 1 for diagonal.
double structure_r(CorrelationStructure s, std::size_t m, std::size_t n);

// Parameter point for the closed-form evaluators. Ranges are enforced at
// construction: s1 in (0,1), s2 > e, s3 > 0, p1..p3 in (0,1), tau in (0,1).
struct BoundParams {
  std::size_t m = 0, n = 0;
  double kmax = 0.0;
  double nu = 0.0;
  double cs = 0.0;
  double s1 = 0.5, s2 = 0.0, s3 = 0.0;
  double p1 = 0.01, p2 = 0.01, p3 = 0.01;
  double tau = 0.1;
  CorrelationStructure structure = CorrelationStructure::dense;

  void validate() const;           // all ranges, including s3
  void validate_geometry() const;  // everything except s3 (used by the ops
                                   // that exist to recommend an s3)
};

struct KBounds {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k_bound = 0.0;
  std::uint64_t k1_ceil = 0, k2_ceil = 0, k3_ceil = 0, k_bound_ceil = 0;
};

struct SmoothTerms {
  double delta_nu = 0.0;
  double b1_fbound = 0.0;
  double d1_fbound = 0.0;
  double beta2 = 0.0, beta3 = 0.0, beta4 = 0.0;
  double alpha = 0.0;
  double nu_bound_smooth = 0.0;
  double sigma_inf = 0.0;
  double sigma_f = 0.0;
};

// Every closed-form quantity evaluated at one parameter point. Fields whose
// width preconditions fail at the point are NaN.
struct BoundReport {
  double L = 0.0, R_M = 0.0, R_D = 0.0, R_sigma = 0.0, R_B = 0.0;
  double nu_bound_quad = 0.0, nu_bound_smooth = 0.0;
  double delta_nu = 0.0, b1_fbound = 0.0, d1_fbound = 0.0;
  double beta2 = 0.0, beta3 = 0.0, beta4 = 0.0, alpha = 0.0;
  double sigma_inf = 0.0, sigma_f = 0.0;
  double s3_bound_quad = 0.0, s3_bound_smooth = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k_bound = 0.0;
  double angle_bound_quad = 0.0, angle_bound_smooth = 0.0;
  std::uint64_t k_bound_ceil = 0;
};

enum class BoundCase { quad, smooth };

// Sampling-width bound for the quadratic regime; rejects kmax = 0 (the flat
// case is handled by callers as "any width admissible").
double nu_bound_quad(std::size_t m, std::size_t n, double kmax,
                     CorrelationStructure structure);

double capital_l(std::size_t m, double kmax);                       // L
double r_m(std::size_t m, std::size_t n, double kmax, double nu);   // R_M
double r_d(std::size_t m, std::size_t n, double kmax);              // R_D
double r_sigma(std::size_t m, std::size_t n, double kmax,
               CorrelationStructure structure);                     // R_sigma
double r_b(std::size_t m, std::size_t n, double kmax);              // R_B

KBounds k_bounds(const BoundParams& p);

double s3_bound(const BoundParams& p, BoundCase which);

SmoothTerms smooth_terms(const BoundParams& p);

// arccos(sqrt((1 - tau^2 - m sigma_f^2)^m)); sigma_f = 0 gives the quadratic
// form of the bound.
double angle_bound(double tau, std::size_t m, double sigma_f);

// Heuristic order estimate nu * sqrt(n/m); not a bound.
double ambient_width_estimate(double nu, std::size_t n, std::size_t m);

struct QuadraticGram {
  Matrix d_hat;  // (n-m) x (n-m)
  double rho = 0.0;
};

// Monte-Carlo estimate of [D]_{l,k} = E[f_{q,l} f_{q,k}] on the quadratic
// part of the embedding, plus its spectral radius.
QuadraticGram expected_quadratic_gram(const EmbeddingSpec& spec, double nu,
                                      std::size_t mc_samples, std::uint64_t seed);

BoundReport bound_report(const BoundParams& p);

std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& r);
std::string bound_report_json(const BoundParams& p, const BoundReport& r);

namespace detail {
// Second algebraic route 1/sqrt(3 R L) for the width bound; kept separate so
// the two routes can be compared as an invariant.
double nu_bound_quad_via_rl(std::size_t m, std::size_t n, double kmax,
                            CorrelationStructure structure);
}  // namespace detail

}  // namespace tanlab
