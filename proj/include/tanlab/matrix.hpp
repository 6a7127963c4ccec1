#pragma once

#include <cstddef>
#include <vector>

namespace tanlab {

// Dense row-major matrix of 64-bit floats. Values are immutable by
// convention once an operation returns them; all free functions below are
// pure and safe to call concurrently.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool all_finite() const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);

// C = (1/scale) * A * A^T. The OpenMP kernel assigns whole output rows to
// threads and each entry is a fixed-order dot product, so the result is
// bit-identical to the serial reference for any thread count.
Matrix gram_outer_serial(const Matrix& a, double scale);
Matrix gram_outer(const Matrix& a, double scale);

// C = (1/scale) * A^T * A, same layout guarantees as gram_outer.
Matrix gram_inner_serial(const Matrix& a, double scale);
Matrix gram_inner(const Matrix& a, double scale);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

// Largest relative asymmetry max|a_ij - a_ji| / max|a_ij| (0 for empty/zero).
double relative_asymmetry(const Matrix& a);

}  // namespace tanlab
