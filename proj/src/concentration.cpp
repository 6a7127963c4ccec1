#include "tanlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tanlab/linalg.hpp"
#include "tanlab/rng.hpp"
#include "tanlab/sampling.hpp"

namespace tanlab {

namespace {
constexpr double kE = 2.718281828459045235360287;
inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

std::string tail_kind_name(TailKind k) {
  switch (k) {
    case TailKind::chernoff_lower: return "chernoff_lower";
    case TailKind::chernoff_upper: return "chernoff_upper";
    case TailKind::bernstein: return "bernstein";
  }
  throw std::logic_error("tail_kind_name: unreachable");
}

TailKind tail_kind_from_name(const std::string& name) {
  if (name == "chernoff_lower" || name == "lower") return TailKind::chernoff_lower;
  if (name == "chernoff_upper" || name == "upper") return TailKind::chernoff_upper;
  if (name == "bernstein") return TailKind::bernstein;
  throw std::invalid_argument("unknown tail bound kind: " + name);
}

double chernoff_lower_tail(std::size_t m, std::size_t n, double kmax, double nu,
                           std::size_t K, double s1) {
  if (!(s1 > 0.0 && s1 < 1.0))
    throw std::invalid_argument("chernoff_lower_tail: s1 must lie in (0,1)");
  const double rm = r_m(m, n, kmax, nu);
  const double expo = -(1.0 - s1) * (1.0 - s1) * static_cast<double>(K) / (6.0 * rm);
  return clamp01(static_cast<double>(n - m + 1) * std::exp(expo));
}

double chernoff_upper_tail(std::size_t m, std::size_t n, double kmax, double nu,
                           std::size_t K, double s2, CorrelationStructure structure) {
  if (!(s2 > kE))
    throw std::invalid_argument("chernoff_upper_tail: s2 must exceed e");
  (void)nu;  // the D-block event threshold scales out of the exponent
  const double rl = structure_r(structure, m, n) * capital_l(m, kmax);
  const double rd = r_d(m, n, kmax);
  if (rd <= 0.0) return 0.0;  // flat manifold: D^(K) is identically zero
  const double expo = s2 * rl * static_cast<double>(K) / rd * (1.0 - std::log(s2));
  return clamp01(static_cast<double>(n - m) * std::exp(expo));
}

double bernstein_tail(std::size_t m, std::size_t n, double kmax, double nu,
                      std::size_t K, double s3, CorrelationStructure structure) {
  if (!(s3 > 0.0)) throw std::invalid_argument("bernstein_tail: s3 must be > 0");
  const double nu3 = nu * nu * nu;
  const double denom = nu3 * nu3 * r_sigma(m, n, kmax, structure) +
                       r_b(m, n, kmax) * nu3 * s3 / 3.0;
  if (denom <= 0.0) return 0.0;
  const double expo = -(s3 * s3 / 2.0) * static_cast<double>(K) / denom;
  return clamp01(static_cast<double>(n) * std::exp(expo));
}

namespace detail {

BlockStats quadratic_block_stats(const EmbeddingSpec& spec, const SampleCloud& cloud) {
  if (spec.family != Family::quadratic || !spec.spectrum.identity_rotations())
    throw std::invalid_argument(
        "quadratic_block_stats: requires an axis-aligned quadratic embedding");
  const std::size_t m = spec.m(), K = cloud.K;
  const Matrix& c = spec.spectrum.kappa;

  // Compressed data matrix [X_t; P Y] with Y the half-squared coordinates.
  const Matrix s = gram_inner(c, 1.0);
  const auto eig_s = sym_eig(s);
  std::size_t rank = 0;
  const double top = eig_s.eigenvalues.empty() ? 0.0 : eig_s.eigenvalues.front();
  for (double ev : eig_s.eigenvalues)
    if (ev > top * 1e-13 && ev > 0.0) ++rank;

  Matrix xp(m + rank, K, 0.0);
  std::vector<double> y(m);
  Matrix yt(m, K, 0.0);  // rows are y_j over samples, reused for the B block
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = cloud.coords(i, j);
      xp(j, i) = x;
      y[j] = 0.5 * x * x;
      yt(j, i) = y[j];
    }
    for (std::size_t t = 0; t < rank; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += eig_s.eigenvectors(k, t) * y[k];
      xp(m + t, i) = std::sqrt(eig_s.eigenvalues[t]) * acc;
    }
  }

  BlockStats out;
  const Matrix cov = gram_outer(xp, static_cast<double>(K));
  const auto eig_cov = sym_eig(cov);
  out.lambda_m = std::max(0.0, eig_cov.eigenvalues[m - 1]);

  if (rank > 0) {
    // rho(D^K): nonzero spectrum of (1/K) (PY)(PY)^T is the lower-right
    // rank x rank block of cov.
    Matrix dered(rank, rank);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < rank; ++j) dered(i, j) = cov(m + i, m + j);
    const auto eig_d = sym_eig(dered);
    out.rho_d = std::max(0.0, eig_d.eigenvalues.front());

    // ||B^K||: B = T C^T with T = (1/K) X_t Y^T, so ||B||^2 = lambda_1(T S T^T).
    Matrix t(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) acc += xp(i, k) * yt(j, k);
        t(i, j) = acc / static_cast<double>(K);
      }
    const Matrix tst = multiply(multiply(t, s), transpose(t));
    const auto eig_b = sym_eig(tst);
    out.b_norm = std::sqrt(std::max(0.0, eig_b.eigenvalues.front()));
  }
  return out;
}

}  // namespace detail

ValidationResult validate_tail_bounds(const TailBoundQuery& q, std::size_t reps,
                                      std::uint64_t seed) {
  if (reps < 100)
    throw std::invalid_argument("validate_tail_bounds: need at least 100 reps");
  if (q.K < q.m) throw std::invalid_argument("validate_tail_bounds: need K >= m");

  ValidationResult res;
  res.reps = reps;
  res.seed = seed;
  const double rl = structure_r(q.structure, q.m, q.n) * capital_l(q.m, q.kmax);
  const double nu4 = q.nu * q.nu * q.nu * q.nu;
  double threshold = 0.0;
  switch (q.kind) {
    case TailKind::chernoff_lower:
      res.theoretical_bound = chernoff_lower_tail(q.m, q.n, q.kmax, q.nu, q.K, q.s1);
      threshold = q.s1 * q.nu * q.nu / 3.0;
      break;
    case TailKind::chernoff_upper:
      res.theoretical_bound =
          chernoff_upper_tail(q.m, q.n, q.kmax, q.nu, q.K, q.s2, q.structure);
      threshold = q.s2 * rl * nu4;  // the event the bound controls uses RL nu^4
      break;
    case TailKind::bernstein:
      res.theoretical_bound =
          bernstein_tail(q.m, q.n, q.kmax, q.nu, q.K, q.s3, q.structure);
      threshold = q.s3;
      break;
  }

  const EmbeddingSpec spec = make_embedding_spec(Family::quadratic, q.m, q.n, q.kmax,
                                                 derive_seed(seed, {0xabcdULL}));
  std::vector<int> hits(reps, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const SampleCloud cloud = sample_cloud(q.m, q.nu, q.K, seed, rep);
    const auto stats = detail::quadratic_block_stats(spec, cloud);
    bool bad = false;
    switch (q.kind) {
      case TailKind::chernoff_lower:
        bad = stats.lambda_m <= threshold;
        break;
      case TailKind::chernoff_upper:
        // Flat manifolds have D^(K) identically zero and no event to exceed.
        bad = threshold > 0.0 && stats.rho_d >= threshold;
        break;
      case TailKind::bernstein:
        bad = stats.b_norm > threshold;
        break;
    }
    hits[rep] = bad ? 1 : 0;
  }
  long total = 0;
  for (int h : hits) total += h;
  res.empirical_frequency = static_cast<double>(total) / static_cast<double>(reps);
  return res;
}

double bernstein_s3_for_bound(std::size_t m, std::size_t n, double kmax, double nu,
                              std::size_t K, CorrelationStructure structure,
                              double target) {
  if (!(target > 0.0 && target < static_cast<double>(n)))
    throw std::invalid_argument("bernstein_s3_for_bound: target out of range");
  const double ln = std::log(static_cast<double>(n) / target);
  const double nu3 = nu * nu * nu;
  const double a = static_cast<double>(K) / 2.0;
  const double b = ln * r_b(m, n, kmax) * nu3 / 3.0;
  const double c = ln * nu3 * nu3 * r_sigma(m, n, kmax, structure);
  return (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
}

std::string validation_csv_header() {
  return "kind,m,n,kmax,nu,K,structure,s1,s2,s3,theoretical,empirical,reps,seed";
}

std::string validation_csv_row(const TailBoundQuery& q, const ValidationResult& r) {
  std::ostringstream os;
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << tail_kind_name(q.kind) << ',' << q.m << ',' << q.n << ',' << num(q.kmax)
     << ',' << num(q.nu) << ',' << q.K << ',' << structure_name(q.structure) << ',';
  os << (q.kind == TailKind::chernoff_lower ? num(q.s1) : "") << ',';
  os << (q.kind == TailKind::chernoff_upper ? num(q.s2) : "") << ',';
  os << (q.kind == TailKind::bernstein ? num(q.s3) : "") << ',';
  os << num(r.theoretical_bound) << ',' << num(r.empirical_frequency) << ','
     << r.reps << ',' << r.seed;
  return os.str();
}

}  // namespace tanlab
