#pragma once

#include <vector>

#include "tanlab/linalg.hpp"
#include "tanlab/manifold.hpp"
#include "tanlab/matrix.hpp"
#include "tanlab/sampling.hpp"

namespace tanlab {

// Tangent frame estimated by PCA about the reference point, together with
// the error metrics against the true tangent span{e_1..e_m}.
struct TangentEstimate {
  Matrix basis;                    // n x m, orthonormal columns
  std::vector<double> eigenvalues; // all n eigenvalues of M^(K), descending;
                                   // trailing exact zeros when K < n
  double u2_frobenius = 0.0;       // ||U_2||_F, rows m..n-1 of the basis
  double angle_radians = 0.0;
  double projection_distance = 0.0;
  bool degenerate_gap = false;     // lambda_m - lambda_{m+1} < 1e-12 lambda_1
};

// PCA on the raw (not mean-subtracted) data matrix: basis spans the top-m
// left singular vectors of X/sqrt(K). Works on the smaller Gram side.
TangentEstimate local_pca(const DataMatrix& x, std::size_t m);

// Angle of Definition "cos^2 = det(W^T W)", computed as
// arccos(prod sigma_i(E^T U)) with the product clamped to [0, 1].
double subspace_angle(const Matrix& u, const Matrix& e);

// Frobenius distance between the projectors uu^T and ee^T.
double projection_distance(const Matrix& u, const Matrix& e);

// Embeds the cloud and estimates the tangent frame. When the family factors
// exactly through a small monomial basis (quadratic / smooth3 with identity
// rotations) the normal block is compressed to its monomial rank first; the
// result is mathematically identical to the direct route and is cross-checked
// against it in the tests.
TangentEstimate estimate_tangent(const EmbeddingSpec& spec, const SampleCloud& cloud);

namespace detail {
TangentEstimate estimate_tangent_reduced(const EmbeddingSpec& spec,
                                         const SampleCloud& cloud);
Matrix canonical_frame(std::size_t n, std::size_t m);
}  // namespace detail

}  // namespace tanlab
