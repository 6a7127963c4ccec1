#include "tanlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "tanlab/linalg.hpp"
#include "tanlab/rng.hpp"
#include "tanlab/sampling.hpp"

namespace tanlab {

namespace {
constexpr double kE = 2.718281828459045235360287;
const double kNan = std::numeric_limits<double>::quiet_NaN();
}  // namespace

std::string structure_name(CorrelationStructure s) {
  return s == CorrelationStructure::dense ? "dense" : "diagonal";
}

CorrelationStructure structure_from_name(const std::string& name) {
  if (name == "dense") return CorrelationStructure::dense;
  if (name == "diagonal") return CorrelationStructure::diagonal;
  throw std::invalid_argument("unknown correlation structure: " + name);
}

double structure_r(CorrelationStructure s, std::size_t m, std::size_t n) {
  if (n <= m) throw std::invalid_argument("structure_r: need n > m");
  return s == CorrelationStructure::dense ? static_cast<double>(n - m) : 1.0;
}

void BoundParams::validate_geometry() const {
  if (m < 1 || n <= m) throw std::invalid_argument("BoundParams: need 1 <= m < n");
  if (!(kmax >= 0.0)) throw std::invalid_argument("BoundParams: kmax must be >= 0");
  if (!(nu >= 0.0)) throw std::invalid_argument("BoundParams: nu must be >= 0");
  if (!(cs >= 0.0)) throw std::invalid_argument("BoundParams: cs must be >= 0");
  if (!(s1 > 0.0 && s1 < 1.0))
    throw std::invalid_argument("BoundParams: s1 must lie in (0,1)");
  if (!(s2 > kE))
    throw std::invalid_argument("BoundParams: s2 must exceed e (log(s2/e) > 0)");
  for (double p : {p1, p2, p3})
    if (!(p > 0.0 && p < 1.0))
      throw std::invalid_argument("BoundParams: p1, p2, p3 must lie in (0,1)");
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("BoundParams: tau must lie in (0,1)");
}

void BoundParams::validate() const {
  validate_geometry();
  if (!(s3 > 0.0)) throw std::invalid_argument("BoundParams: s3 must be > 0");
}

double capital_l(std::size_t m, double kmax) {
  const double md = static_cast<double>(m);
  return md * (5.0 * md + 4.0) * kmax * kmax / 180.0;
}

double nu_bound_quad(std::size_t m, std::size_t n, double kmax,
                     CorrelationStructure structure) {
  if (m < 1 || n <= m) throw std::invalid_argument("nu_bound_quad: need 1 <= m < n");
  if (kmax <= 0.0)
    throw std::invalid_argument(
        "nu_bound_quad: kmax = 0 means a flat manifold; any width is admissible");
  const double md = static_cast<double>(m);
  double denom = md * (5.0 * md + 4.0) * kmax * kmax;
  if (structure == CorrelationStructure::dense) denom *= static_cast<double>(n - m);
  return std::sqrt(60.0 / denom);
}

namespace detail {

double nu_bound_quad_via_rl(std::size_t m, std::size_t n, double kmax,
                            CorrelationStructure structure) {
  if (kmax <= 0.0)
    throw std::invalid_argument("nu_bound_quad: kmax = 0 means a flat manifold");
  const double rl = structure_r(structure, m, n) * capital_l(m, kmax);
  return 1.0 / std::sqrt(3.0 * rl);
}

}  // namespace detail

double r_m(std::size_t m, std::size_t n, double kmax, double nu) {
  const double md = static_cast<double>(m);
  return md + 0.25 * static_cast<double>(n - m) * md * md * nu * nu * kmax * kmax;
}

double r_d(std::size_t m, std::size_t n, double kmax) {
  const double md = static_cast<double>(m);
  return 0.25 * static_cast<double>(n - m) * md * md * kmax * kmax;
}

double r_sigma(std::size_t m, std::size_t n, double kmax,
               CorrelationStructure structure) {
  const double md = static_cast<double>(m);
  const double r = structure_r(structure, m, n);
  return md * md * kmax * kmax / 12.0 *
         std::max(static_cast<double>(n - m), r * (5.0 * md + 4.0) / 15.0);
}

double r_b(std::size_t m, std::size_t n, double kmax) {
  const double md = static_cast<double>(m);
  return 0.5 * md * std::sqrt(md) * std::sqrt(static_cast<double>(n - m)) * kmax;
}

KBounds k_bounds(const BoundParams& p) {
  p.validate();
  if (!(p.nu > 0.0)) throw std::invalid_argument("k_bounds: nu must be > 0");
  const double nm = static_cast<double>(p.n - p.m);
  const double rl = structure_r(p.structure, p.m, p.n) * capital_l(p.m, p.kmax);
  const double nu2 = p.nu * p.nu;
  const double nu3 = nu2 * p.nu;
  const double nu6 = nu3 * nu3;
  KBounds k;
  k.k1 = 6.0 * r_m(p.m, p.n, p.kmax, p.nu) / ((1.0 - p.s1) * (1.0 - p.s1)) *
         std::log((nm + 1.0) / p.p1);
  if (rl > 0.0)
    k.k2 = r_d(p.m, p.n, p.kmax) / (p.s2 * rl) * std::log(nm / p.p2) /
           std::log(p.s2 / kE);
  k.k3 = (nu6 * r_sigma(p.m, p.n, p.kmax, p.structure) +
          r_b(p.m, p.n, p.kmax) * nu3 * p.s3 / 3.0) /
         (p.s3 * p.s3 / 2.0) * std::log(static_cast<double>(p.n) / p.p3);
  k.k_bound = std::max({k.k1, k.k2, k.k3});
  const auto to_ceil = [](double v) {
    const double c = std::ceil(std::max(v, 0.0));
    return c >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                       : static_cast<std::uint64_t>(c);
  };
  k.k1_ceil = to_ceil(k.k1);
  k.k2_ceil = to_ceil(k.k2);
  k.k3_ceil = to_ceil(k.k3);
  k.k_bound_ceil = to_ceil(k.k_bound);
  return k;
}

SmoothTerms smooth_terms(const BoundParams& p) {
  p.validate_geometry();
  const double md = static_cast<double>(p.m);
  const double nm = static_cast<double>(p.n - p.m);
  const double rl = structure_r(p.structure, p.m, p.n) * capital_l(p.m, p.kmax);
  if (rl <= 0.0 && p.cs <= 0.0)
    throw std::invalid_argument(
        "smooth_terms: flat manifold (kmax = 0, cs = 0); any width is admissible");
  const double m32 = md * std::sqrt(md);
  SmoothTerms t;
  const double nu2 = p.nu * p.nu;
  const double nu3 = nu2 * p.nu;
  const double nu4 = nu2 * nu2;
  t.delta_nu = p.cs * m32 * nu3;
  t.b1_fbound = std::sqrt(md * nm) * p.cs * m32 * nu4;
  t.d1_fbound = nm * p.cs * md * md * std::sqrt(md) * nu4 * p.nu *
                (p.cs * std::sqrt(md) * p.nu + p.kmax);
  t.beta2 = 4.0 * p.cs * m32 * std::sqrt(md * nm);
  t.beta3 = 2.0 * nm * p.cs * md * md * std::sqrt(md) * p.kmax;
  t.beta4 = 2.0 * nm * p.cs * p.cs * md * md * md;
  double alpha = 1.0 / std::sqrt(3.0 * (t.beta2 + rl));
  if (t.beta3 > 0.0) alpha = std::min(alpha, std::cbrt(1.0 / (3.0 * t.beta3)));
  if (t.beta4 > 0.0) alpha = std::min(alpha, std::pow(3.0 * t.beta4, -0.25));
  t.alpha = alpha;
  t.nu_bound_smooth = std::sqrt(
      p.s1 / (3.0 * ((t.beta2 + p.s2 * rl) + t.beta3 * alpha + t.beta4 * alpha * alpha)));
  const double pert = 2.0 * (t.b1_fbound + t.d1_fbound);
  const double denom_inf = nu2 / 3.0 - rl * nu4 - pert;
  if (denom_inf <= 0.0)
    throw std::invalid_argument(
        "smooth_terms: width too large for smooth regime (sigma denominator "
        "non-positive)");
  t.sigma_inf = t.b1_fbound / denom_inf;
  // The finite-sample regime is stricter; past it sigma_f is undefined.
  const double denom_f = (p.s1 * nu2 / 3.0 - p.s2 * rl * nu4) - pert;
  t.sigma_f = denom_f > 0.0 ? t.b1_fbound / denom_f
                            : std::numeric_limits<double>::quiet_NaN();
  return t;
}

double s3_bound(const BoundParams& p, BoundCase which) {
  p.validate_geometry();
  const double rl = structure_r(p.structure, p.m, p.n) * capital_l(p.m, p.kmax);
  const double nu2 = p.nu * p.nu;
  const double nu4 = nu2 * nu2;
  const double core = p.s1 * nu2 / 3.0 - p.s2 * rl * nu4;
  if (which == BoundCase::quad) {
    if (rl > 0.0 && !(p.nu < std::sqrt(p.s1 / (3.0 * p.s2 * rl))))
      throw std::invalid_argument(
          "s3_bound: precondition nu < sqrt(s1/s2) * nu_bound_quad violated");
    return core * p.tau / std::sqrt(static_cast<double>(p.m));
  }
  const SmoothTerms t = smooth_terms(p);
  if (!(p.nu < t.nu_bound_smooth))
    throw std::invalid_argument("s3_bound: precondition nu < nu_bound_smooth violated");
  const double margin = core - 2.0 * (t.b1_fbound + t.d1_fbound);
  return margin * std::sqrt(p.tau * p.tau / static_cast<double>(p.m) +
                            t.sigma_f * t.sigma_f) -
         t.b1_fbound;
}

double angle_bound(double tau, std::size_t m, double sigma_f) {
  const double inner = 1.0 - tau * tau - static_cast<double>(m) * sigma_f * sigma_f;
  if (!(inner > 0.0))
    throw std::invalid_argument(
        "angle_bound: requires tau^2 + m sigma_f^2 < 1, got " +
        std::to_string(tau * tau + static_cast<double>(m) * sigma_f * sigma_f));
  const double c = std::sqrt(std::pow(inner, static_cast<double>(m)));
  return std::acos(std::clamp(c, 0.0, 1.0));
}

double ambient_width_estimate(double nu, std::size_t n, std::size_t m) {
  if (m > n) throw std::invalid_argument("ambient_width_estimate: need m <= n");
  return nu * std::sqrt(static_cast<double>(n) / static_cast<double>(m));
}

QuadraticGram expected_quadratic_gram(const EmbeddingSpec& spec, double nu,
                                      std::size_t mc_samples, std::uint64_t seed) {
  if (mc_samples < 1000)
    throw std::invalid_argument("expected_quadratic_gram: need >= 1e3 samples");
  const std::size_t m = spec.m();
  const std::size_t normals = spec.n() - m;
  QuadraticGram out;
  if (spec.spectrum.identity_rotations()) {
    // f_q = kappa * y with y_j = x_j^2 / 2, so D-hat = kappa M_y kappa^T with
    // M_y the sample second-moment matrix of y. Nonzero spectrum of D-hat
    // equals the spectrum of H S H with S = kappa^T kappa and H = M_y^{1/2}.
    Matrix my(m, m, 0.0);
    Rng rng(derive_seed(seed, {0}));
    std::vector<double> y(m);
    for (std::size_t s = 0; s < mc_samples; ++s) {
      for (std::size_t j = 0; j < m; ++j) {
        const double x = rng.next_symmetric(nu);
        y[j] = 0.5 * x * x;
      }
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) my(i, j) += y[i] * y[j];
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) {
        my(i, j) /= static_cast<double>(mc_samples);
        my(j, i) = my(i, j);
      }
    out.d_hat = multiply(multiply(spec.spectrum.kappa, my),
                         transpose(spec.spectrum.kappa));
    const auto ey = sym_eig(my);
    Matrix h(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k)
          acc += ey.eigenvectors(i, k) * std::sqrt(std::max(0.0, ey.eigenvalues[k])) *
                 ey.eigenvectors(j, k);
        h(i, j) = acc;
      }
    const Matrix s = gram_inner(spec.spectrum.kappa, 1.0);
    const auto hsh = sym_eig(multiply(multiply(h, s), h));
    out.rho = hsh.eigenvalues.empty() ? 0.0 : std::max(0.0, hsh.eigenvalues.front());
    return out;
  }
  out.d_hat = Matrix(normals, normals, 0.0);
  Rng rng(derive_seed(seed, {0}));
  std::vector<double> x(m);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    for (std::size_t j = 0; j < m; ++j) x[j] = rng.next_symmetric(nu);
    const auto fq = quadratic_part(spec, x);
    for (std::size_t l = 0; l < normals; ++l)
      for (std::size_t k = l; k < normals; ++k) out.d_hat(l, k) += fq[l] * fq[k];
  }
  for (std::size_t l = 0; l < normals; ++l)
    for (std::size_t k = l; k < normals; ++k) {
      out.d_hat(l, k) /= static_cast<double>(mc_samples);
      out.d_hat(k, l) = out.d_hat(l, k);
    }
  out.rho = spectral_radius(out.d_hat);
  return out;
}

BoundReport bound_report(const BoundParams& p) {
  p.validate();
  BoundReport r;
  r.L = capital_l(p.m, p.kmax);
  r.R_M = r_m(p.m, p.n, p.kmax, p.nu);
  r.R_D = r_d(p.m, p.n, p.kmax);
  r.R_sigma = r_sigma(p.m, p.n, p.kmax, p.structure);
  r.R_B = r_b(p.m, p.n, p.kmax);
  r.nu_bound_quad = p.kmax > 0.0 ? nu_bound_quad(p.m, p.n, p.kmax, p.structure) : kNan;
  try {
    const SmoothTerms t = smooth_terms(p);
    r.nu_bound_smooth = t.nu_bound_smooth;
    r.delta_nu = t.delta_nu;
    r.b1_fbound = t.b1_fbound;
    r.d1_fbound = t.d1_fbound;
    r.beta2 = t.beta2;
    r.beta3 = t.beta3;
    r.beta4 = t.beta4;
    r.alpha = t.alpha;
    r.sigma_inf = t.sigma_inf;
    r.sigma_f = t.sigma_f;
  } catch (const std::invalid_argument&) {
    r.nu_bound_smooth = r.delta_nu = r.b1_fbound = r.d1_fbound = kNan;
    r.beta2 = r.beta3 = r.beta4 = r.alpha = kNan;
    r.sigma_inf = r.sigma_f = kNan;
  }
  try {
    r.s3_bound_quad = s3_bound(p, BoundCase::quad);
  } catch (const std::invalid_argument&) {
    r.s3_bound_quad = kNan;
  }
  try {
    r.s3_bound_smooth = s3_bound(p, BoundCase::smooth);
  } catch (const std::invalid_argument&) {
    r.s3_bound_smooth = kNan;
  }
  const KBounds k = k_bounds(p);
  r.k1 = k.k1;
  r.k2 = k.k2;
  r.k3 = k.k3;
  r.k_bound = k.k_bound;
  r.k_bound_ceil = k.k_bound_ceil;
  try {
    r.angle_bound_quad = angle_bound(p.tau, p.m, 0.0);
  } catch (const std::invalid_argument&) {
    r.angle_bound_quad = kNan;
  }
  try {
    r.angle_bound_smooth =
        std::isnan(r.sigma_f) ? kNan : angle_bound(p.tau, p.m, r.sigma_f);
  } catch (const std::invalid_argument&) {
    r.angle_bound_smooth = kNan;
  }
  return r;
}

std::string bound_report_csv_header() {
  return "L,R_M,R_D,R_sigma,R_B,nu_bound_quad,nu_bound_smooth,delta_nu,"
         "b1_fbound,d1_fbound,beta2,beta3,beta4,alpha,sigma_inf,sigma_f,"
         "s3_bound_quad,s3_bound_smooth,k1,k2,k3,k_bound,angle_bound_quad,"
         "angle_bound_smooth";
}

std::string bound_report_csv_row(const BoundReport& r) {
  const double fields[] = {r.L,        r.R_M,          r.R_D,
                           r.R_sigma,  r.R_B,          r.nu_bound_quad,
                           r.nu_bound_smooth, r.delta_nu, r.b1_fbound,
                           r.d1_fbound, r.beta2,       r.beta3,
                           r.beta4,    r.alpha,        r.sigma_inf,
                           r.sigma_f,  r.s3_bound_quad, r.s3_bound_smooth,
                           r.k1,       r.k2,           r.k3,
                           r.k_bound,  r.angle_bound_quad, r.angle_bound_smooth};
  std::ostringstream os;
  char buf[40];
  bool first = true;
  for (double v : fields) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (!first) os << ',';
    os << buf;
    first = false;
  }
  return os.str();
}

std::string bound_report_json(const BoundParams& p, const BoundReport& r) {
  nlohmann::json j;
  j["params"] = {{"m", p.m},     {"n", p.n},     {"kmax", p.kmax},
                 {"nu", p.nu},   {"cs", p.cs},   {"s1", p.s1},
                 {"s2", p.s2},   {"s3", p.s3},   {"p1", p.p1},
                 {"p2", p.p2},   {"p3", p.p3},   {"tau", p.tau},
                 {"structure", structure_name(p.structure)}};
  j["report"] = {{"L", r.L},
                 {"R_M", r.R_M},
                 {"R_D", r.R_D},
                 {"R_sigma", r.R_sigma},
                 {"R_B", r.R_B},
                 {"nu_bound_quad", r.nu_bound_quad},
                 {"nu_bound_smooth", r.nu_bound_smooth},
                 {"delta_nu", r.delta_nu},
                 {"b1_fbound", r.b1_fbound},
                 {"d1_fbound", r.d1_fbound},
                 {"beta2", r.beta2},
                 {"beta3", r.beta3},
                 {"beta4", r.beta4},
                 {"alpha", r.alpha},
                 {"sigma_inf", r.sigma_inf},
                 {"sigma_f", r.sigma_f},
                 {"s3_bound_quad", r.s3_bound_quad},
                 {"s3_bound_smooth", r.s3_bound_smooth},
                 {"k1", r.k1},
                 {"k2", r.k2},
                 {"k3", r.k3},
                 {"k_bound", r.k_bound},
                 {"k_bound_ceil", r.k_bound_ceil},
                 {"angle_bound_quad", r.angle_bound_quad},
                 {"angle_bound_smooth", r.angle_bound_smooth}};
  return j.dump(2);
}

}  // namespace tanlab
