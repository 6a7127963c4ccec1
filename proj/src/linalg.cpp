#include "tanlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tanlab {

namespace {

constexpr int kMaxJacobiSweeps = 60;
constexpr std::size_t kTridiagCrossover = 400;

void check_symmetric_input(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("sym_eig: matrix is not square (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ")");
  if (!a.all_finite())
    throw std::invalid_argument("sym_eig: matrix has non-finite entries");
  const double asym = relative_asymmetry(a);
  if (asym > 1e-12)
    throw std::invalid_argument(
        "sym_eig: matrix is not symmetric, max relative asymmetry " +
        std::to_string(asym));
}

void sort_pairs_descending(std::vector<double>& values, Matrix& vectors) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
  std::vector<double> sv(n);
  Matrix swv(vectors.rows(), n);
  for (std::size_t k = 0; k < n; ++k) {
    sv[k] = values[order[k]];
    for (std::size_t i = 0; i < vectors.rows(); ++i) swv(i, k) = vectors(i, order[k]);
  }
  values = std::move(sv);
  vectors = std::move(swv);
}

EigenDecomposition jacobi_eig(Matrix a) {
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  // Symmetrize; asymmetry already bounded by the caller's check.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  const double frob = frobenius_norm(a);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-14 * frob || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = akp - s * (akq + tau * akp);
          a(k, q) = akq + s * (akp - tau * akq);
          a(p, k) = a(k, p);
          a(q, k) = a(k, q);
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp - s * (vkq + tau * vkp);
          v(k, q) = vkq + s * (vkp - tau * vkq);
        }
      }
    }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  sort_pairs_descending(values, v);
  return {std::move(values), std::move(v)};
}

inline double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction to tridiagonal form with accumulation of the
// transform (Numerical Recipes tred2 layout, adapted to row-major Matrix).
void householder_tridiag(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k)
            z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
        for (std::size_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      z(j, i) = 0.0;
      z(i, j) = 0.0;
    }
  }
}

// Implicit-shift QL on a tridiagonal matrix, rotating the columns of z.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw std::runtime_error("tridiag_ql: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflowed = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflowed = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (underflowed) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& a) {
  check_symmetric_input(a);
  return jacobi_eig(a);
}

namespace detail {

EigenDecomposition tridiag_sym_eig(const Matrix& a) {
  check_symmetric_input(a);
  const std::size_t n = a.rows();
  Matrix z = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (z(i, j) + z(j, i));
      z(i, j) = m;
      z(j, i) = m;
    }
  std::vector<double> d, e;
  householder_tridiag(z, d, e);
  tridiag_ql(d, e, z);
  sort_pairs_descending(d, z);
  return {std::move(d), std::move(z)};
}

EigenDecomposition sym_eig_auto(const Matrix& a) {
  return a.rows() <= kTridiagCrossover ? sym_eig(a) : tridiag_sym_eig(a);
}

void orthonormalize_columns(Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t prev = 0; prev < j; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < rows; ++i) dot += m(i, prev) * m(i, j);
      for (std::size_t i = 0; i < rows; ++i) m(i, j) -= dot * m(i, prev);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (std::size_t i = 0; i < rows; ++i) m(i, j) /= norm;
  }
}

}  // namespace detail

namespace {

// Completes columns j of u flagged in `needs_fill` to an orthonormal set,
// drawing replacements from the canonical basis.
void complete_orthonormal(Matrix& u, const std::vector<bool>& needs_fill) {
  const std::size_t rows = u.rows(), cols = u.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    if (!needs_fill[j]) continue;
    for (std::size_t cand = 0; cand < rows; ++cand) {
      for (std::size_t i = 0; i < rows; ++i) u(i, j) = (i == cand) ? 1.0 : 0.0;
      for (std::size_t prev = 0; prev < cols; ++prev) {
        if (prev == j || needs_fill[prev]) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < rows; ++i) dot += u(i, prev) * u(i, j);
        for (std::size_t i = 0; i < rows; ++i) u(i, j) -= dot * u(i, prev);
      }
      for (std::size_t prev = 0; prev < j; ++prev) {
        if (!needs_fill[prev]) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < rows; ++i) dot += u(i, prev) * u(i, j);
        for (std::size_t i = 0; i < rows; ++i) u(i, j) -= dot * u(i, prev);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < rows; ++i) norm += u(i, j) * u(i, j);
      norm = std::sqrt(norm);
      if (norm > 0.5) {
        for (std::size_t i = 0; i < rows; ++i) u(i, j) /= norm;
        break;
      }
    }
  }
}

}  // namespace

ThinSvd thin_svd(const Matrix& x) {
  if (!x.all_finite())
    throw std::invalid_argument("thin_svd: matrix has non-finite entries");
  const bool transposed = x.rows() < x.cols();
  // Work on a tall p x q copy with column-contiguous storage.
  const std::size_t p = transposed ? x.cols() : x.rows();
  const std::size_t q = transposed ? x.rows() : x.cols();
  std::vector<double> a(p * q);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (transposed)
        a[i * p + j] = x(i, j);  // column i of x^T
      else
        a[j * p + i] = x(i, j);
    }
  Matrix v = Matrix::identity(q);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool converged = true;
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        double* ci = a.data() + i * p;
        double* cj = a.data() + j * p;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          alpha += ci[k] * ci[k];
          beta += cj[k] * cj[k];
          gamma += ci[k] * cj[k];
        }
        if (std::fabs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0)
          continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < p; ++k) {
          const double vi = ci[k], vj = cj[k];
          ci[k] = c * vi - s * vj;
          cj[k] = s * vi + c * vj;
        }
        for (std::size_t k = 0; k < q; ++k) {
          const double vi = v(k, i), vj = v(k, j);
          v(k, i) = c * vi - s * vj;
          v(k, j) = s * vi + c * vj;
        }
      }
    }
    if (converged) break;
  }
  std::vector<double> sigma(q);
  for (std::size_t j = 0; j < q; ++j) {
    double norm = 0.0;
    for (std::size_t k = 0; k < p; ++k) norm += a[j * p + k] * a[j * p + k];
    sigma[j] = std::sqrt(norm);
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });
  const double fuzz = sigma.empty() ? 0.0 : sigma[order[0]];
  Matrix u_tall(p, q, 0.0);
  Matrix v_sorted(q, q);
  std::vector<double> values(q);
  std::vector<bool> needs_fill(q, false);
  for (std::size_t col = 0; col < q; ++col) {
    const std::size_t src = order[col];
    values[col] = sigma[src];
    for (std::size_t k = 0; k < q; ++k) v_sorted(k, col) = v(k, src);
    if (sigma[src] > fuzz * 1e-300 && sigma[src] > 0.0) {
      for (std::size_t k = 0; k < p; ++k)
        u_tall(k, col) = a[src * p + k] / sigma[src];
    } else {
      values[col] = 0.0;
      needs_fill[col] = true;
    }
  }
  complete_orthonormal(u_tall, needs_fill);
  ThinSvd out;
  out.singular_values = std::move(values);
  if (transposed) {
    out.left_vectors = std::move(v_sorted);
    out.right_vectors = std::move(u_tall);
  } else {
    out.left_vectors = std::move(u_tall);
    out.right_vectors = std::move(v_sorted);
  }
  return out;
}

MatrixNorms matrix_norms(const Matrix& a) {
  if (!a.all_finite())
    throw std::invalid_argument("matrix_norms: matrix has non-finite entries");
  MatrixNorms out;
  out.frobenius_norm = frobenius_norm(a);
  out.operator_norm = thin_svd(a).singular_values.front();
  if (a.rows() == a.cols() && relative_asymmetry(a) <= 1e-12) {
    const auto eig = detail::sym_eig_auto(a);
    double rho = 0.0;
    for (double ev : eig.eigenvalues) rho = std::max(rho, std::fabs(ev));
    out.spectral_radius = rho;
  }
  return out;
}

double spectral_radius(const Matrix& a) {
  const auto norms = matrix_norms(a);
  if (!norms.spectral_radius)
    throw std::invalid_argument(
        "spectral_radius: defined for symmetric matrices only, max relative "
        "asymmetry " +
        std::to_string(relative_asymmetry(a)));
  return *norms.spectral_radius;
}

}  // namespace tanlab
