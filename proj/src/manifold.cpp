#include "tanlab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "tanlab/rng.hpp"

namespace tanlab {

std::string family_name(Family f) {
  switch (f) {
    case Family::quadratic: return "quadratic";
    case Family::smooth1_exp: return "smooth1_exp";
    case Family::smooth2_sin: return "smooth2_sin";
    case Family::smooth3_poly: return "smooth3_poly";
  }
  throw std::logic_error("family_name: unreachable");
}

Family family_from_name(const std::string& name) {
  if (name == "quadratic") return Family::quadratic;
  if (name == "smooth1_exp" || name == "smooth1") return Family::smooth1_exp;
  if (name == "smooth2_sin" || name == "smooth2") return Family::smooth2_sin;
  if (name == "smooth3_poly" || name == "smooth3") return Family::smooth3_poly;
  throw std::invalid_argument("unknown embedding family: " + name);
}

CurvatureSpectrum generate_spectrum(std::size_t m, std::size_t n, double kmax,
                                    std::uint64_t seed, bool force_extreme) {
  if (m < 1 || m >= n)
    throw std::invalid_argument("generate_spectrum: need 1 <= m < n");
  if (kmax < 0.0)
    throw std::invalid_argument("generate_spectrum: kmax must be >= 0");
  CurvatureSpectrum spec;
  spec.m = m;
  spec.n = n;
  spec.kappa = Matrix(n - m, m, 0.0);
  Rng rng(seed);
  for (std::size_t l = 0; l < n - m; ++l) {
    for (std::size_t j = 0; j < m; ++j) spec.kappa(l, j) = rng.next_positive(kmax);
    const double sign = rng.next_sign();
    for (std::size_t j = 0; j < m; ++j) spec.kappa(l, j) *= sign;
  }
  if (force_extreme && kmax > 0.0) {
    const std::size_t l = static_cast<std::size_t>(rng.next_below(n - m));
    const std::size_t j = static_cast<std::size_t>(rng.next_below(m));
    const double sign = spec.kappa(l, j) >= 0.0 ? 1.0 : -1.0;
    spec.kappa(l, j) = sign * kmax;
  }
  return spec;
}

EmbeddingSpec make_embedding_spec(Family family, std::size_t m, std::size_t n,
                                  double kmax, std::uint64_t seed,
                                  bool force_extreme) {
  EmbeddingSpec spec;
  spec.family = family;
  spec.kmax = kmax;
  spec.seed = seed;
  spec.spectrum =
      generate_spectrum(m, n, kmax, derive_seed(seed, {0}), force_extreme);
  if (family == Family::smooth3_poly) {
    PolyCoeffs pc{Matrix(n - m, m), Matrix(n - m, m), Matrix(n - m, m)};
    Rng rng(derive_seed(seed, {1}));
    for (std::size_t l = 0; l < n - m; ++l)
      for (std::size_t j = 0; j < m; ++j) {
        pc.a(l, j) = rng.next_positive(10.0);
        pc.b(l, j) = rng.next_positive(10.0);
        pc.c(l, j) = rng.next_positive(10.0);
      }
    spec.poly_coeffs = std::move(pc);
  }
  return spec;
}

namespace {

void check_point(const EmbeddingSpec& spec, const std::vector<double>& x) {
  if (x.size() != spec.m())
    throw std::invalid_argument("tangent coordinate has length " +
                                std::to_string(x.size()) + ", expected m = " +
                                std::to_string(spec.m()));
}

// One normal component of the quadratic part.
double quad_component(const CurvatureSpectrum& s, std::size_t l, const double* x) {
  const std::size_t m = s.m;
  double acc = 0.0;
  if (s.identity_rotations()) {
    for (std::size_t j = 0; j < m; ++j) acc += s.kappa(l, j) * x[j] * x[j];
  } else {
    const Matrix& v = (*s.rotations)[l];
    for (std::size_t j = 0; j < m; ++j) {
      double proj = 0.0;
      for (std::size_t i = 0; i < m; ++i) proj += x[i] * v(i, j);
      acc += s.kappa(l, j) * proj * proj;
    }
  }
  return 0.5 * acc;
}

double quad_component(const CurvatureSpectrum& s, std::size_t l,
                      const std::vector<double>& x) {
  return quad_component(s, l, x.data());
}

double smooth3_component(const EmbeddingSpec& spec, std::size_t l, const double* x) {
  const PolyCoeffs& pc = *spec.poly_coeffs;
  double acc = 0.0;
  for (std::size_t j = 0; j < spec.m(); ++j) {
    const double x2 = x[j] * x[j];
    const double x3 = x2 * x[j];
    acc += 0.5 * spec.spectrum.kappa(l, j) * x2 + pc.a(l, j) * x3 +
           pc.b(l, j) * x3 * x[j] + pc.c(l, j) * x3 * x2;
  }
  return acc;
}

// sin(q) - q with a series branch to dodge cancellation near zero.
double sin_remainder(double q) {
  if (std::fabs(q) < 1e-2) {
    const double q2 = q * q;
    return -q * q2 / 6.0 * (1.0 - q2 / 20.0 * (1.0 - q2 / 42.0));
  }
  return std::sin(q) - q;
}

}  // namespace

std::vector<double> quadratic_part(const EmbeddingSpec& spec,
                                   const std::vector<double>& x) {
  check_point(spec, x);
  const std::size_t r = spec.n() - spec.m();
  std::vector<double> out(r);
  for (std::size_t l = 0; l < r; ++l) out[l] = quad_component(spec.spectrum, l, x);
  return out;
}

namespace detail {

void evaluate_embedding_into(const EmbeddingSpec& spec, const double* x,
                             double* out) {
  const std::size_t m = spec.m(), n = spec.n();
  for (std::size_t j = 0; j < m; ++j) out[j] = x[j];
  for (std::size_t l = 0; l < n - m; ++l) {
    double f;
    switch (spec.family) {
      case Family::quadratic:
        f = quad_component(spec.spectrum, l, x);
        break;
      case Family::smooth1_exp:
        f = -std::expm1(quad_component(spec.spectrum, l, x));
        break;
      case Family::smooth2_sin:
        f = std::sin(quad_component(spec.spectrum, l, x));
        break;
      case Family::smooth3_poly:
        f = smooth3_component(spec, l, x);
        break;
      default:
        throw std::logic_error("evaluate_embedding: unreachable");
    }
    out[m + l] = f;
  }
}

}  // namespace detail

std::vector<double> evaluate_embedding(const EmbeddingSpec& spec,
                                       const std::vector<double>& x) {
  check_point(spec, x);
  std::vector<double> p(spec.n());
  detail::evaluate_embedding_into(spec, x.data(), p.data());
  return p;
}

namespace detail {

// The second-order Taylor part of the composite mapping. For smooth1 the
// chain rule flips the sign of the Hessian (1 - exp(q) ~ -q), so the
// remainder is taken against -q there, against +q elsewhere.
std::vector<double> taylor_remainder(const EmbeddingSpec& spec,
                                     const std::vector<double>& x) {
  check_point(spec, x);
  const std::size_t m = spec.m(), n = spec.n();
  std::vector<double> r(n - m, 0.0);
  switch (spec.family) {
    case Family::quadratic:
      break;
    case Family::smooth1_exp:
      for (std::size_t l = 0; l < n - m; ++l) {
        const double q = quad_component(spec.spectrum, l, x);
        r[l] = -(std::expm1(q) - q);
      }
      break;
    case Family::smooth2_sin:
      for (std::size_t l = 0; l < n - m; ++l)
        r[l] = sin_remainder(quad_component(spec.spectrum, l, x));
      break;
    case Family::smooth3_poly: {
      const PolyCoeffs& pc = *spec.poly_coeffs;
      for (std::size_t l = 0; l < n - m; ++l) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double x3 = x[j] * x[j] * x[j];
          acc += pc.a(l, j) * x3 + pc.b(l, j) * x3 * x[j] +
                 pc.c(l, j) * x3 * x[j] * x[j];
        }
        r[l] = acc;
      }
      break;
    }
  }
  return r;
}

}  // namespace detail

namespace {

struct RatioTracker {
  std::vector<double> per_normal;
  double floor_norm;

  explicit RatioTracker(std::size_t count, double floor)
      : per_normal(count, 0.0), floor_norm(floor) {}

  // Returns max_l of the ratio at x (0 if below the exclusion floor).
  double update(const EmbeddingSpec& spec, const std::vector<double>& x) {
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    if (norm < floor_norm) return 0.0;
    const double inv3 = 1.0 / (norm2 * norm);
    const auto rem = detail::taylor_remainder(spec, x);
    double best = 0.0;
    for (std::size_t l = 0; l < rem.size(); ++l) {
      const double ratio = std::fabs(rem[l]) * inv3;
      per_normal[l] = std::max(per_normal[l], ratio);
      best = std::max(best, ratio);
    }
    return best;
  }
};

void ascend(const EmbeddingSpec& spec, RatioTracker& tracker,
            std::vector<double> x, double nu) {
  const std::size_t m = x.size();
  double step = 0.25 * nu;
  double best = tracker.update(spec, x);
  std::vector<double> trial(m);
  for (int iter = 0; iter < 60 && step > 1e-6 * nu; ++iter) {
    bool improved = false;
    for (std::size_t j = 0; j < m; ++j) {
      for (double dir : {+1.0, -1.0}) {
        trial = x;
        trial[j] = std::clamp(trial[j] + dir * step, -nu, nu);
        const double v = tracker.update(spec, trial);
        if (v > best) {
          best = v;
          x = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

DeviationEstimate estimate_cs(const EmbeddingSpec& spec, double nu,
                              std::size_t grid_points_per_axis) {
  if (nu <= 0.0) throw std::invalid_argument("estimate_cs: nu must be > 0");
  if (grid_points_per_axis < 3)
    throw std::invalid_argument("estimate_cs: need >= 3 grid points per axis");
  const std::size_t m = spec.m();
  const std::size_t normals = spec.n() - m;
  DeviationEstimate est;
  est.grid_resolution = grid_points_per_axis;
  est.domain_halfwidth = nu;
  est.per_normal.assign(normals, 0.0);
  if (spec.family == Family::quadratic) return est;  // remainder identically 0

  RatioTracker tracker(normals, 1e-6 * nu);
  std::vector<double> x(m);
  if (m <= 4) {
    const std::size_t g = grid_points_per_axis;
    std::size_t total = 1;
    for (std::size_t j = 0; j < m; ++j) total *= g;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t cell = rem % g;
        rem /= g;
        x[j] = -nu + 2.0 * nu * static_cast<double>(cell) /
                          static_cast<double>(g - 1);
      }
      tracker.update(spec, x);
    }
  } else {
    // Kronecker (additive recurrence) low-discrepancy points on the cube.
    const std::size_t samples = 100000;
    std::vector<double> alpha(m), state(m, 0.5);
    // Irrational strides from the generalized golden ratio.
    double phi = 1.0;
    for (int it = 0; it < 40; ++it)
      phi = std::pow(1.0 + phi, 1.0 / (static_cast<double>(m) + 1.0));
    for (std::size_t j = 0; j < m; ++j)
      alpha[j] = std::fmod(std::pow(1.0 / phi, static_cast<double>(j + 1)), 1.0);
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t j = 0; j < m; ++j) {
        state[j] = std::fmod(state[j] + alpha[j], 1.0);
        x[j] = nu * (2.0 * state[j] - 1.0);
      }
      tracker.update(spec, x);
    }
    Rng rng(derive_seed(spec.seed, {0x63737265ULL}));
    for (int restart = 0; restart < 1000; ++restart) {
      for (std::size_t j = 0; j < m; ++j) x[j] = rng.next_symmetric(nu);
      ascend(spec, tracker, x, nu);
    }
  }
  est.per_normal = tracker.per_normal;
  for (double& v : est.per_normal) v *= 1.2;
  est.cs = est.per_normal.empty()
               ? 0.0
               : *std::max_element(est.per_normal.begin(), est.per_normal.end());
  return est;
}

std::string to_json(const EmbeddingSpec& spec) {
  if (!spec.spectrum.identity_rotations())
    throw std::invalid_argument(
        "to_json: only axis-aligned (identity rotation) specs are serializable");
  nlohmann::json j;
  j["family"] = family_name(spec.family);
  j["m"] = spec.m();
  j["n"] = spec.n();
  j["kmax"] = spec.kmax;
  j["seed"] = spec.seed;
  auto rows = nlohmann::json::array();
  for (std::size_t l = 0; l < spec.n() - spec.m(); ++l) {
    auto row = nlohmann::json::array();
    for (std::size_t k = 0; k < spec.m(); ++k) row.push_back(spec.spectrum.kappa(l, k));
    rows.push_back(std::move(row));
  }
  j["kappa"] = std::move(rows);
  if (spec.poly_coeffs) {
    auto coeffs = nlohmann::json::array();
    for (std::size_t l = 0; l < spec.n() - spec.m(); ++l) {
      auto row = nlohmann::json::array();
      for (std::size_t k = 0; k < spec.m(); ++k)
        row.push_back({spec.poly_coeffs->a(l, k), spec.poly_coeffs->b(l, k),
                       spec.poly_coeffs->c(l, k)});
      coeffs.push_back(std::move(row));
    }
    j["poly_coeffs"] = std::move(coeffs);
  } else {
    j["poly_coeffs"] = nullptr;
  }
  return j.dump(2);
}

EmbeddingSpec spec_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EmbeddingSpec spec;
  spec.family = family_from_name(j.at("family").get<std::string>());
  const auto m = j.at("m").get<std::size_t>();
  const auto n = j.at("n").get<std::size_t>();
  spec.kmax = j.at("kmax").get<double>();
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.spectrum.m = m;
  spec.spectrum.n = n;
  spec.spectrum.kappa = Matrix(n - m, m);
  const auto& rows = j.at("kappa");
  for (std::size_t l = 0; l < n - m; ++l)
    for (std::size_t k = 0; k < m; ++k)
      spec.spectrum.kappa(l, k) = rows.at(l).at(k).get<double>();
  if (spec.family == Family::smooth3_poly) {
    PolyCoeffs pc{Matrix(n - m, m), Matrix(n - m, m), Matrix(n - m, m)};
    const auto& coeffs = j.at("poly_coeffs");
    for (std::size_t l = 0; l < n - m; ++l)
      for (std::size_t k = 0; k < m; ++k) {
        pc.a(l, k) = coeffs.at(l).at(k).at(0).get<double>();
        pc.b(l, k) = coeffs.at(l).at(k).at(1).get<double>();
        pc.c(l, k) = coeffs.at(l).at(k).at(2).get<double>();
      }
    spec.poly_coeffs = std::move(pc);
  }
  return spec;
}

void MonomialMap::monomials(const double* x, std::size_t m, double* out) const {
  if (terms == m) {
    for (std::size_t j = 0; j < m; ++j) out[j] = 0.5 * x[j] * x[j];
    return;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double x2 = x[j] * x[j];
    const double x3 = x2 * x[j];
    out[4 * j + 0] = 0.5 * x2;
    out[4 * j + 1] = x3;
    out[4 * j + 2] = x3 * x[j];
    out[4 * j + 3] = x3 * x2;
  }
}

MonomialMap monomial_map(const EmbeddingSpec& spec) {
  MonomialMap map;
  if (!spec.spectrum.identity_rotations()) return map;
  const std::size_t m = spec.m();
  const std::size_t normals = spec.n() - m;
  if (spec.family == Family::quadratic) {
    map.exact = true;
    map.terms = m;
    map.coeff = spec.spectrum.kappa;
  } else if (spec.family == Family::smooth3_poly) {
    map.exact = true;
    map.terms = 4 * m;
    map.coeff = Matrix(normals, 4 * m, 0.0);
    const PolyCoeffs& pc = *spec.poly_coeffs;
    for (std::size_t l = 0; l < normals; ++l)
      for (std::size_t j = 0; j < m; ++j) {
        map.coeff(l, 4 * j + 0) = spec.spectrum.kappa(l, j);
        map.coeff(l, 4 * j + 1) = pc.a(l, j);
        map.coeff(l, 4 * j + 2) = pc.b(l, j);
        map.coeff(l, 4 * j + 3) = pc.c(l, j);
      }
  }
  return map;
}

}  // namespace tanlab
