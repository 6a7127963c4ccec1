#pragma once

#include <optional>
#include <vector>

#include "tanlab/matrix.hpp"

namespace tanlab {

// Eigenpairs of a real symmetric matrix: eigenvalues sorted non-increasing,
// eigenvector columns aligned with them and orthonormal.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

struct ThinSvd {
  Matrix left_vectors;                 // p x s, orthonormal columns
  std::vector<double> singular_values; // s, non-increasing, >= 0
  Matrix right_vectors;                // q x s, orthonormal columns
};

struct MatrixNorms {
  double operator_norm;
  double frobenius_norm;
  std::optional<double> spectral_radius;  // present iff input symmetric
};

// Cyclic Jacobi rotations. Input must be square and symmetric to 1e-12
// relative asymmetry; it is symmetrized internally before sweeping.
EigenDecomposition sym_eig(const Matrix& a);

// One-sided Jacobi on the narrow side of x. s = min(rows, cols) columns are
// always returned; exact-zero singular directions get an orthonormal
// completion.
ThinSvd thin_svd(const Matrix& x);

MatrixNorms matrix_norms(const Matrix& a);
double spectral_radius(const Matrix& a);  // rejects asymmetric input

namespace detail {

// Householder tridiagonalization + implicit-shift QL with eigenvector
// accumulation. Same contract as sym_eig; O(n^3) with a small constant, used
// where full Jacobi sweeps would be too slow (large covariance solves).
EigenDecomposition tridiag_sym_eig(const Matrix& a);

// Picks Jacobi below the crossover dimension, the tridiagonal path above it.
EigenDecomposition sym_eig_auto(const Matrix& a);

void orthonormalize_columns(Matrix& m);

}  // namespace detail

}  // namespace tanlab
