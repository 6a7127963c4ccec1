#include "tanlab/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tanlab {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("Matrix: dimensions must be >= 1");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("multiply: inner dimensions disagree (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  Matrix c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      double* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

namespace {

inline double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += x[k] * y[k];
  return s;
}

}  // namespace

Matrix gram_outer_serial(const Matrix& a, double scale) {
  const std::size_t p = a.rows(), q = a.cols();
  Matrix c(p, p);
  const double inv = 1.0 / scale;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const double v = dot(a.row(i), a.row(j), q) * inv;
      c(i, j) = v;
      c(j, i) = v;
    }
  return c;
}

Matrix gram_outer(const Matrix& a, double scale) {
  const std::size_t p = a.rows(), q = a.cols();
  Matrix c(p, p);
  const double inv = 1.0 / scale;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      const double v = dot(a.row(i), a.row(j), q) * inv;
      c(i, j) = v;
      c(j, i) = v;
    }
  return c;
}

Matrix gram_inner_serial(const Matrix& a, double scale) {
  const std::size_t p = a.rows(), q = a.cols();
  Matrix c(q, q, 0.0);
  // Accumulate rank-one updates row by row; entry (i,j) sees rows of A in
  // index order, which keeps the parallel kernel's per-entry sums identical.
  for (std::size_t k = 0; k < p; ++k) {
    const double* r = a.row(k);
    for (std::size_t i = 0; i < q; ++i) {
      const double rik = r[i];
      if (rik == 0.0) continue;
      double* crow = c.row(i);
      for (std::size_t j = i; j < q; ++j) crow[j] += rik * r[j];
    }
  }
  const double inv = 1.0 / scale;
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i; j < q; ++j) {
      c(i, j) *= inv;
      c(j, i) = c(i, j);
    }
  return c;
}

Matrix gram_inner(const Matrix& a, double scale) {
  const std::size_t p = a.rows(), q = a.cols();
  Matrix c(q, q, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < q; ++i) {
    double* crow = c.row(i);
    for (std::size_t k = 0; k < p; ++k) {
      const double rik = a(k, i);
      if (rik == 0.0) continue;
      const double* r = a.row(k);
      for (std::size_t j = i; j < q; ++j) crow[j] += rik * r[j];
    }
  }
  const double inv = 1.0 / scale;
  for (std::size_t i = 0; i < q; ++i)
    for (std::size_t j = i; j < q; ++j) {
      c(i, j) *= inv;
      c(j, i) = c(i, j);
    }
  return c;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  const double* d = a.data();
  const std::size_t n = a.rows() * a.cols();
  for (std::size_t k = 0; k < n; ++k) s += d[k] * d[k];
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  const double* d = a.data();
  const std::size_t n = a.rows() * a.cols();
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::fabs(d[k]));
  return m;
}

double relative_asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::fabs(a(i, j) - a(j, i)));
  const double scale = max_abs(a);
  return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace tanlab
