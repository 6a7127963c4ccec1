#include "tanlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tanlab {

namespace {

void check_frame(const Matrix& u, const char* what) {
  if (u.rows() < u.cols())
    throw std::invalid_argument(std::string(what) + ": frame is wider than tall");
  const std::size_t m = u.cols();
  double err2 = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < u.rows(); ++k) dot += u(k, i) * u(k, j);
      const double target = (i == j) ? 1.0 : 0.0;
      err2 += (dot - target) * (dot - target);
    }
  if (std::sqrt(err2) > 1e-8 * std::sqrt(static_cast<double>(m)))
    throw std::invalid_argument(std::string(what) +
                                ": columns are not orthonormal (deviation " +
                                std::to_string(std::sqrt(err2)) + ")");
}

// ||E^T U||_F^2 for two frames with orthonormal columns.
double cross_gram_sq(const Matrix& u, const Matrix& e) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.cols(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < u.rows(); ++k) dot += e(k, i) * u(k, j);
      s += dot * dot;
    }
  return s;
}

void fill_metrics(TangentEstimate& est, std::size_t m) {
  const std::size_t n = est.basis.rows();
  double u2 = 0.0;
  for (std::size_t i = m; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) u2 += est.basis(i, j) * est.basis(i, j);
  est.u2_frobenius = std::sqrt(u2);
  const Matrix e = detail::canonical_frame(n, m);
  est.angle_radians = subspace_angle(est.basis, e);
  est.projection_distance = projection_distance(est.basis, e);
  const double l1 = est.eigenvalues.empty() ? 0.0 : est.eigenvalues.front();
  const double lm = est.eigenvalues[m - 1];
  const double lm1 = m < est.eigenvalues.size() ? est.eigenvalues[m] : 0.0;
  est.degenerate_gap = (lm - lm1) < 1e-12 * l1;
}

// Replaces numerically dead columns by orthonormal completion and runs one
// Gram-Schmidt pass over the rest.
void finalize_basis(Matrix& basis, const std::vector<bool>& dead) {
  const std::size_t n = basis.rows(), m = basis.cols();
  for (std::size_t j = 0; j < m; ++j) {
    if (!dead[j]) continue;
    for (std::size_t cand = 0; cand < n; ++cand) {
      for (std::size_t i = 0; i < n; ++i) basis(i, j) = (i == cand) ? 1.0 : 0.0;
      for (std::size_t prev = 0; prev < m; ++prev) {
        if (prev == j || (dead[prev] && prev > j)) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += basis(i, prev) * basis(i, j);
        for (std::size_t i = 0; i < n; ++i) basis(i, j) -= dot * basis(i, prev);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm += basis(i, j) * basis(i, j);
      if (norm > 0.25) break;
    }
  }
  detail::orthonormalize_columns(basis);
}

}  // namespace

namespace detail {

Matrix canonical_frame(std::size_t n, std::size_t m) {
  Matrix e(n, m, 0.0);
  for (std::size_t j = 0; j < m; ++j) e(j, j) = 1.0;
  return e;
}

}  // namespace detail

double subspace_angle(const Matrix& u, const Matrix& e) {
  check_frame(u, "subspace_angle");
  check_frame(e, "subspace_angle");
  if (u.rows() != e.rows() || u.cols() != e.cols())
    throw std::invalid_argument("subspace_angle: frame shapes disagree");
  const Matrix w = multiply(transpose(e), u);
  const auto svd = thin_svd(w);
  double prod = 1.0;
  for (double s : svd.singular_values) prod *= s;
  prod = std::clamp(prod, 0.0, 1.0);
  const double via_cos = std::acos(prod);
  // The cosine route cannot resolve angles below sqrt(eps). The residual
  // (I - ee^T)u gives sin(theta_i) exactly, and 1 - prod cos^2(theta_i)
  // <= sum sin^2(theta_i), so asin of its Frobenius norm is a rigorous upper
  // bound that is exact at zero.
  const std::size_t n = u.rows(), m = u.cols();
  double resid2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double proj = 0.0;
      for (std::size_t k = 0; k < m; ++k) proj += e(i, k) * w(k, j);
      const double r = u(i, j) - proj;
      resid2 += r * r;
    }
  const double via_sin = std::asin(std::clamp(std::sqrt(resid2), 0.0, 1.0));
  return std::min(via_cos, via_sin);
}

double projection_distance(const Matrix& u, const Matrix& e) {
  check_frame(u, "projection_distance");
  check_frame(e, "projection_distance");
  if (u.rows() != e.rows())
    throw std::invalid_argument("projection_distance: row counts disagree");
  const double cross = cross_gram_sq(u, e);
  const double val = static_cast<double>(u.cols()) +
                     static_cast<double>(e.cols()) - 2.0 * cross;
  return std::sqrt(std::max(0.0, val));
}

TangentEstimate local_pca(const DataMatrix& x, std::size_t m) {
  const std::size_t n = x.rows(), K = x.cols();
  if (m < 1) throw std::invalid_argument("local_pca: m must be >= 1");
  if (m > n)
    throw std::invalid_argument("local_pca: m exceeds the ambient dimension");
  if (K < m)
    throw std::invalid_argument("local_pca: need at least m samples (K = " +
                                std::to_string(K) + ", m = " + std::to_string(m) + ")");
  if (!x.all_finite())
    throw std::invalid_argument("local_pca: data matrix has non-finite entries");

  TangentEstimate est;
  est.eigenvalues.assign(n, 0.0);
  est.basis = Matrix(n, m, 0.0);
  std::vector<bool> dead(m, false);

  if (n <= K) {
    const Matrix cov = gram_outer(x, static_cast<double>(K));
    auto eig = detail::sym_eig_auto(cov);
    for (std::size_t i = 0; i < n; ++i)
      est.eigenvalues[i] = std::max(0.0, eig.eigenvalues[i]);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t i = 0; i < n; ++i) est.basis(i, j) = eig.eigenvectors(i, j);
  } else {
    // K < n: eigensolve the K x K inner Gram and map the vectors through X.
    const Matrix gram = gram_inner(x, static_cast<double>(K));
    auto eig = detail::sym_eig_auto(gram);
    double top = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      est.eigenvalues[i] = std::max(0.0, eig.eigenvalues[i]);
      top = std::max(top, est.eigenvalues[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double w = est.eigenvalues[j];
      if (w <= top * 1e-28 || w == 0.0) {
        dead[j] = true;
        continue;
      }
      const double inv = 1.0 / std::sqrt(static_cast<double>(K) * w);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* row = x.row(i);
        for (std::size_t k = 0; k < K; ++k) acc += row[k] * eig.eigenvectors(k, j);
        est.basis(i, j) = acc * inv;
      }
    }
  }
  finalize_basis(est.basis, dead);
  fill_metrics(est, m);
  return est;
}

namespace detail {

TangentEstimate estimate_tangent_reduced(const EmbeddingSpec& spec,
                                         const SampleCloud& cloud) {
  const MonomialMap map = monomial_map(spec);
  if (!map.exact)
    throw std::invalid_argument("estimate_tangent_reduced: family does not factor");
  const std::size_t m = spec.m(), n = spec.n(), K = cloud.K;
  if (K < m)
    throw std::invalid_argument("estimate_tangent_reduced: need at least m samples");
  const std::size_t r = map.terms;

  // Monomial Gram of the coefficient matrix and its square root.
  const Matrix s = gram_inner(map.coeff, 1.0);
  const auto eig_s = sym_eig(s);
  std::size_t rank = 0;
  const double top = eig_s.eigenvalues.empty() ? 0.0 : eig_s.eigenvalues.front();
  for (std::size_t i = 0; i < r; ++i)
    if (eig_s.eigenvalues[i] > top * 1e-13 && eig_s.eigenvalues[i] > 0.0) ++rank;

  // Compressed data matrix [X_t; P Z] with P = Lambda^{1/2} W^T.
  Matrix xp(m + rank, K, 0.0);
  std::vector<double> xrow(m), z(r);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      xrow[j] = cloud.coords(i, j);
      xp(j, i) = xrow[j];
    }
    map.monomials(xrow.data(), m, z.data());
    for (std::size_t t = 0; t < rank; ++t) {
      const double scale = std::sqrt(eig_s.eigenvalues[t]);
      double acc = 0.0;
      for (std::size_t k = 0; k < r; ++k) acc += eig_s.eigenvectors(k, t) * z[k];
      xp(m + t, i) = scale * acc;
    }
  }

  const Matrix cov = gram_outer(xp, static_cast<double>(K));
  auto eig = sym_eig(cov);

  TangentEstimate est;
  est.eigenvalues.assign(n, 0.0);
  const std::size_t reported = std::min(n, m + rank);
  double top_cov = 0.0;
  for (std::size_t i = 0; i < reported; ++i) {
    est.eigenvalues[i] = std::max(0.0, eig.eigenvalues[i]);
    top_cov = std::max(top_cov, est.eigenvalues[i]);
  }

  // Expand the compressed normal rows back to the ambient coordinates:
  // U_2 = coeff * W Lambda^{-1/2} * U_2'.
  est.basis = Matrix(n, m, 0.0);
  std::vector<bool> dead(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    if (eig.eigenvalues[j] <= top_cov * 1e-28) {
      dead[j] = true;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) est.basis(i, j) = eig.eigenvectors(i, j);
  }
  if (rank > 0) {
    Matrix back(r, m, 0.0);  // W Lambda^{-1/2} U_2'
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t j = 0; j < m; ++j) {
        if (dead[j]) continue;
        double acc = 0.0;
        for (std::size_t t = 0; t < rank; ++t)
          acc += eig_s.eigenvectors(k, t) / std::sqrt(eig_s.eigenvalues[t]) *
                 eig.eigenvectors(m + t, j);
        back(k, j) = acc;
      }
    for (std::size_t l = 0; l < n - m; ++l)
      for (std::size_t j = 0; j < m; ++j) {
        if (dead[j]) continue;
        double acc = 0.0;
        for (std::size_t k = 0; k < r; ++k) acc += map.coeff(l, k) * back(k, j);
        est.basis(m + l, j) = acc;
      }
  }
  finalize_basis(est.basis, dead);
  fill_metrics(est, m);
  return est;
}

}  // namespace detail

TangentEstimate estimate_tangent(const EmbeddingSpec& spec, const SampleCloud& cloud) {
  if (spec.m() != cloud.m)
    throw std::invalid_argument("estimate_tangent: spec.m != cloud.m");
  if (monomial_map(spec).exact)
    return detail::estimate_tangent_reduced(spec, cloud);
  return local_pca(embed_cloud(spec, cloud), spec.m());
}

}  // namespace tanlab
