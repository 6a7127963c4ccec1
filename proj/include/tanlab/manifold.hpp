#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tanlab/matrix.hpp"

namespace tanlab {

enum class Family { quadratic, smooth1_exp, smooth2_sin, smooth3_poly };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Principal curvature data for the n-m normal directions of a germ at P.
// Row l of kappa holds the curvatures of the l-th hypersurface; rotations
// V_l are optional (absent means identity, the axis-aligned case used by the
// experiment defaults).
struct CurvatureSpectrum {
  std::size_t m = 0;
  std::size_t n = 0;
  Matrix kappa;  // (n-m) x m
  std::optional<std::vector<Matrix>> rotations;

  bool identity_rotations() const { return !rotations.has_value(); }
};

struct PolyCoeffs {
  Matrix a, b, c;  // each (n-m) x m, entries in [0, 10]
};

struct EmbeddingSpec {
  Family family = Family::quadratic;
  CurvatureSpectrum spectrum;
  std::optional<PolyCoeffs> poly_coeffs;  // present iff family == smooth3_poly
  double kmax = 0.0;                      // declared |K_max|
  std::uint64_t seed = 0;                 // provenance, kept for replay

  std::size_t m() const { return spectrum.m; }
  std::size_t n() const { return spectrum.n; }
};

struct DeviationEstimate {
  double cs = 0.0;
  std::vector<double> per_normal;
  std::size_t grid_resolution = 0;
  double domain_halfwidth = 0.0;
};

// Row magnitudes i.i.d. uniform on [0, kmax], then one fair-coin sign per
// row. With force_extreme a randomly chosen entry is pinned to +/-kmax.
CurvatureSpectrum generate_spectrum(std::size_t m, std::size_t n, double kmax,
                                    std::uint64_t seed, bool force_extreme = false);

// Spectrum plus, for smooth3, polynomial coefficients drawn uniform on
// [0, 10]; all randomness derives from `seed`.
EmbeddingSpec make_embedding_spec(Family family, std::size_t m, std::size_t n,
                                  double kmax, std::uint64_t seed,
                                  bool force_extreme = false);

// f_{q,l}(x) = 0.5 * sum_j <x, v_{l,j}>^2 K_{l,j} for every normal index l.
std::vector<double> quadratic_part(const EmbeddingSpec& spec,
                                   const std::vector<double>& x);

// Point [x^T f_1(x) ... f_{n-m}(x)]^T in R^n.
std::vector<double> evaluate_embedding(const EmbeddingSpec& spec,
                                       const std::vector<double>& x);

// Deviation of each f_l from its own second-order Taylor part, divided by
// ||x||^3, maximized over the sampling cube and inflated by a 1.2 safety
// factor. Full grid for m <= 4, low-discrepancy sampling plus local ascent
// restarts above that.
DeviationEstimate estimate_cs(const EmbeddingSpec& spec, double nu,
                              std::size_t grid_points_per_axis);

std::string to_json(const EmbeddingSpec& spec);
EmbeddingSpec spec_from_json(const std::string& text);

// Exact factorization of the normal block as coeff * Z(x) where the rows of
// Z are fixed monomials of the tangent coordinates. Available for the
// quadratic and smooth3 families with identity rotations; `exact` is false
// otherwise. Z has `terms` rows.
struct MonomialMap {
  bool exact = false;
  std::size_t terms = 0;
  Matrix coeff;  // (n-m) x terms

  void monomials(const double* x, std::size_t m, double* out) const;
};

MonomialMap monomial_map(const EmbeddingSpec& spec);

namespace detail {
// f_l(x) - (true second-order Taylor part of f_l)(x), all normal indices.
std::vector<double> taylor_remainder(const EmbeddingSpec& spec,
                                     const std::vector<double>& x);
// Allocation-free core of evaluate_embedding: out must hold n values.
void evaluate_embedding_into(const EmbeddingSpec& spec, const double* x,
                             double* out);
}  // namespace detail

}  // namespace tanlab
