// Acceptance suite: one check per criterion, one printed line per criterion.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "tanlab/concentration.hpp"
#include "tanlab/estimator.hpp"
#include "tanlab/harness.hpp"
#include "tanlab/rng.hpp"
#include "tanlab/sampling.hpp"
#include "test_support.hpp"

using namespace tanlab;
using namespace tanlab::testing;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
int failures = 0;

struct Criterion {
  int id;
  bool ok = true;
  std::string detail;
  std::chrono::steady_clock::time_point start;

  explicit Criterion(int id_) : id(id_), start(std::chrono::steady_clock::now()) {}

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }

  void finish(const std::string& title) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", id,
                title.c_str(), secs, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (double(i) + double(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

// --- criteria ---------------------------------------------------------------

void criterion_1() {
  Criterion c(1);
  Rng rng(1001);
  for (int t = 0; t < 100 && c.ok; ++t) {
    const std::size_t n = 2 + rng.next_below(79);
    const Matrix a = random_symmetric(n, rng, 2.0);
    const auto eig = sym_eig(a);
    c.require(reconstruction_error(a, eig) < 1e-9 * frobenius_norm(a),
              "reconstruction at n=" + std::to_string(n));
    c.require(orthonormality_error(eig.eigenvectors) < 1e-10,
              "orthonormality at n=" + std::to_string(n));
  }
  for (int t = 0; t < 20 && c.ok; ++t) {
    const std::size_t rows = 2 + rng.next_below(40);
    const std::size_t cols = 2 + rng.next_below(40);
    const Matrix x = random_matrix(rows, cols, rng);
    const auto svd = thin_svd(x);
    const auto eig = sym_eig(gram_outer(x, 1.0));
    const double top = std::max(eig.eigenvalues[0], 1e-30);
    for (std::size_t i = 0; i < svd.singular_values.size(); ++i) {
      const double s2 = svd.singular_values[i] * svd.singular_values[i];
      c.require(std::fabs(s2 - eig.eigenvalues[i]) <= 1e-8 * top,
                "svd/eig agreement");
    }
  }
  c.finish("linear-algebra contracts (eig reconstruction, orthonormality, svd)");
}

void criterion_2() {
  Criterion c(2);
  Rng rng(2002);
  int checked_bound = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 6 + rng.next_below(45);
    const std::size_t m = 1 + rng.next_below(std::min<std::size_t>(5, n - 1));
    Matrix u = detail::canonical_frame(n, m);
    const double scale = rng.next_unit() * 1.5;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) u(i, j) += scale * rng.next_symmetric(1.0);
    tanlab::detail::orthonormalize_columns(u);
    const Matrix e = detail::canonical_frame(n, m);
    double u2 = 0.0;
    for (std::size_t i = m; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) u2 += u(i, j) * u(i, j);
    const double pd = projection_distance(u, e);
    if (std::fabs(pd * pd - 2.0 * u2) >= 1e-10) {
      c.require(false, "projector identity at trial " + std::to_string(t));
      break;
    }
    const double u2f = std::sqrt(u2);
    if (u2f < 1.0) {
      ++checked_bound;
      const double tau = std::min(0.9999999, u2f * (1.0 + 1e-9) + 1e-12);
      const double angle = subspace_angle(u, e);
      if (!(angle < angle_bound(tau, m, 0.0) + 1e-9)) {
        c.require(false, "angle bound at trial " + std::to_string(t));
        break;
      }
    }
  }
  c.require(checked_bound > 300, "enough frames inside the U2 < 1 regime");
  c.finish("projector-distance identity and U2-norm angle bound on 1000 frames");
}

void criterion_3() {
  Criterion c(3);
  const std::size_t m = 3, K = 1000000;
  const auto cloud = sample_cloud(m, 1.0, K, 31415, 0);
  double norm4 = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    double n2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) n2 += cloud.coords(i, j) * cloud.coords(i, j);
    norm4 += n2 * n2;
  }
  norm4 /= double(K);
  const double closed = double(m) * (5.0 * m + 4.0) / 45.0;  // = 19/15
  c.require(std::fabs(norm4 - closed) / closed < 0.01,
            "got " + num(norm4) + " vs " + num(closed));
  c.finish("fourth-moment closed form m(5m+4)nu^4/45 at K = 1e6");
}

void criterion_4() {
  Criterion c(4);
  const EmbeddingSpec flat = make_embedding_spec(Family::quadratic, 5, 50, 0.0, 4);
  const auto cloud = sample_cloud(5, 0.5, 5, 11, 0);
  const auto direct = local_pca(embed_cloud(flat, cloud), 5);
  const auto reduced = tanlab::detail::estimate_tangent_reduced(flat, cloud);
  c.require(direct.angle_radians * kRadToDeg < 1e-8,
            "direct angle " + num(direct.angle_radians * kRadToDeg) + " deg");
  c.require(reduced.angle_radians * kRadToDeg < 1e-8,
            "reduced angle " + num(reduced.angle_radians * kRadToDeg) + " deg");
  c.finish("flat manifold estimated exactly at K = m");
}

void criterion_5() {
  Criterion c(5);
  const std::size_t m = 5, n = 100;
  const EmbeddingSpec spec = make_embedding_spec(Family::quadratic, m, n, 10.0, 500);
  const double nu =
      0.8 * nu_bound_quad(m, n, 10.0, CorrelationStructure::dense);
  auto mean_angle = [&](std::size_t K) {
    double sum = 0.0;
    for (std::size_t t = 0; t < 10; ++t) {
      const auto cloud = sample_cloud(m, nu, K, 77, t);
      sum += local_pca(embed_cloud(spec, cloud), m).angle_radians * kRadToDeg;
    }
    return sum / 10.0;
  };
  const double big = mean_angle(20000);
  const double small = mean_angle(200);
  c.require(big < 5.0, "mean angle at K=2e4 is " + num(big));
  c.require(big < 0.25 * small,
            "K=2e4 mean " + num(big) + " not < 1/4 of K=200 mean " + num(small));
  c.finish("asymptotic convergence at 0.8 nu_bound_quad");
}

void criterion_6() {
  Criterion c(6);
  const std::size_t m = 5, n = 100;
  const double kmax = 10.0;
  const double nbq = nu_bound_quad(m, n, kmax, CorrelationStructure::dense);
  std::vector<std::size_t> kgrid;
  for (std::size_t K = 100; K <= 2000; K += 100) kgrid.push_back(K);

  int fam_idx = 0;
  for (Family fam : {Family::quadratic, Family::smooth1_exp, Family::smooth2_sin,
                     Family::smooth3_poly}) {
    const EmbeddingSpec spec =
        make_embedding_spec(fam, m, n, kmax, 600 + fam_idx);
    for (double gamma : {1.2, 4.0}) {
      std::vector<double> ks, means;
      for (std::size_t ki = 0; ki < kgrid.size(); ++ki) {
        const double mean = tanlab::detail::mean_trial_angle(
            spec, gamma * nbq, kgrid[ki], 25, 900 + fam_idx,
            (std::uint64_t(gamma * 10) << 32) | ki, false);
        ks.push_back(double(kgrid[ki]));
        means.push_back(mean);
      }
      const double rho = spearman(ks, means);
      const std::string tag = family_name(fam) + " gamma=" + num(gamma);
      if (gamma < 2.0) {
        c.require(means.back() < 20.0,
                  tag + ": angle(K=2000) = " + num(means.back()));
        c.require(rho <= -0.8, tag + ": spearman = " + num(rho));
      } else {
        c.require(means.back() > 45.0,
                  tag + ": angle(K=2000) = " + num(means.back()));
        c.require(rho >= 0.8, tag + ": spearman = " + num(rho));
      }
    }
    ++fam_idx;
  }
  c.finish("angle-vs-K trends for all four families at gamma 1.2 and 4");
}

void criterion_7() {
  Criterion c(7);
  TailBoundQuery q;
  q.m = 5;
  q.n = 100;
  q.kmax = 10.0;
  q.nu = nu_bound_quad(5, 100, 10.0, CorrelationStructure::dense);
  q.K = 2000;
  q.structure = CorrelationStructure::dense;
  q.s1 = 0.5;
  q.s2 = 2.0 * std::exp(1.0);
  q.s3 = bernstein_s3_for_bound(q.m, q.n, q.kmax, q.nu, q.K, q.structure, 0.25);
  const std::size_t reps = 500;
  for (TailKind kind :
       {TailKind::chernoff_lower, TailKind::chernoff_upper, TailKind::bernstein}) {
    q.kind = kind;
    const auto res = validate_tail_bounds(q, reps, 7007);
    const double p = res.theoretical_bound;
    const double slack = 3.0 * std::sqrt(std::max(p * (1.0 - p), 1e-12) / reps);
    c.require(res.empirical_frequency <= p + slack,
              tail_kind_name(kind) + ": empirical " + num(res.empirical_frequency) +
                  " vs bound " + num(p) + " + " + num(slack));
  }
  c.finish("tail bounds sound over 500 Monte-Carlo reps at the reference point");
}

void criterion_8() {
  Criterion c(8);
  // (a) sweep over n at kmax = 10
  ExperimentConfig cfg;
  cfg.experiment = Experiment::max_nu_vs_n;
  cfg.family = Family::quadratic;
  cfg.m_list = {5};
  cfg.kmax_grid = {10.0};
  cfg.n_grid.clear();
  for (std::size_t n = 100; n <= 1000; n += 50) cfg.n_grid.push_back(n);
  cfg.theta_bound_deg = {5.0};
  cfg.trials = 25;
  cfg.seed = 88;
  cfg.apply_defaults_and_check();
  const auto over_n = run_max_nu_sweep(cfg);
  std::vector<double> ns, nus;
  for (const auto& r : over_n) {
    c.require(r.trial == "AGGREGATE", "censored point at n=" + std::to_string(r.n));
    c.require(r.gamma >= 1.0 && r.gamma <= 2.5,
              "gamma ratio " + num(r.gamma) + " at n=" + std::to_string(r.n));
    ns.push_back(double(r.n));
    nus.push_back(r.nu);
  }
  const double slope_n = fit_loglog_slope(ns, nus);
  c.require(slope_n >= -0.65 && slope_n <= -0.35,
            "slope vs n = " + num(slope_n));

  // (b) sweep over kmax at n = 100
  ExperimentConfig cfg2;
  cfg2.experiment = Experiment::max_nu_vs_kmax;
  cfg2.family = Family::quadratic;
  cfg2.m_list = {5};
  cfg2.n_grid = {100};
  cfg2.kmax_grid.clear();
  for (double k = 0.5; k <= 10.0 + 1e-9; k += 0.5) cfg2.kmax_grid.push_back(k);
  cfg2.theta_bound_deg = {5.0};
  cfg2.trials = 25;
  cfg2.seed = 89;
  cfg2.apply_defaults_and_check();
  const auto over_k = run_max_nu_sweep(cfg2);
  std::vector<double> kms, nus2;
  for (const auto& r : over_k) {
    kms.push_back(r.kmax);
    nus2.push_back(r.nu);
  }
  const double slope_k = fit_loglog_slope(kms, nus2);
  c.require(slope_k >= -1.2 && slope_k <= -0.8, "slope vs kmax = " + num(slope_k));
  c.finish("max-width scaling laws in n and in kmax");
}

void criterion_9() {
  Criterion c(9);
  const double dense = nu_bound_quad(5, 100, 10.0, CorrelationStructure::dense);
  const double diag = nu_bound_quad(5, 100, 10.0, CorrelationStructure::diagonal);
  c.require(std::fabs(dense - 6.5998e-3) <= 1e-7,
            "dense bound " + num(dense));
  c.require(std::fabs(diag - 6.4327e-2) <= 1e-6, "diagonal bound " + num(diag));
  Rng rng(9009);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng.next_below(12);
    const std::size_t n = m + 1 + rng.next_below(3000);
    const double kmax = 0.05 + rng.next_positive(40.0);
    const auto s = (t % 2 == 0) ? CorrelationStructure::dense
                                : CorrelationStructure::diagonal;
    const double a = nu_bound_quad(m, n, kmax, s);
    const double b = tanlab::detail::nu_bound_quad_via_rl(m, n, kmax, s);
    if (std::fabs(a - b) > 1e-12 * a) {
      c.require(false, "route mismatch at grid point " + std::to_string(t));
      break;
    }
  }
  c.finish("width-bound arithmetic: frozen values and dual-route agreement");
}

void criterion_10() {
  Criterion c(10);
  ExperimentConfig cfg;
  cfg.experiment = Experiment::theory_vs_empirical;
  cfg.family = Family::quadratic;
  cfg.m_list = {5};
  cfg.n_grid = {100};
  cfg.kmax_grid = {10.0};
  cfg.c_list = {0.4};
  cfg.trials = 25;
  cfg.seed = 101;
  cfg.apply_defaults_and_check();
  const auto records = run_theory_vs_empirical(cfg);

  std::vector<double> theory_angle, theory_k, emp;
  for (const auto& r : records) {
    if (r.trial == "THEORY") {
      theory_angle.push_back(r.angle_deg);
      theory_k.push_back(double(r.K));
    } else if (r.trial == "AGGREGATE") {
      emp.push_back(r.angle_deg);
    }
  }
  c.require(theory_angle.size() == 20, "theory rows present");
  for (std::size_t i = 1; i < theory_angle.size(); ++i) {
    if (!(theory_angle[i] > theory_angle[i - 1]) || theory_k[i] > theory_k[i - 1]) {
      c.require(false, "theory curve not monotone at row " + std::to_string(i));
      break;
    }
  }
  c.require(emp.size() == 20, "empirical aggregates present");
  std::vector<double> smooth;
  for (std::size_t i = 0; i + 5 <= emp.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < i + 5; ++j) s += emp[j];
    smooth.push_back(s / 5.0);
  }
  for (std::size_t i = 1; i < smooth.size(); ++i)
    if (!(smooth[i] <= smooth[i - 1] * (1.0 + 1e-12))) {
      c.require(false, "smoothed empirical curve rises at index " +
                           std::to_string(i) + " (" + num(smooth[i - 1]) + " -> " +
                           num(smooth[i]) + ")");
      break;
    }
  c.finish("theory and empirical K/angle curves are monotone at c = 0.4");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%s: %d/10 criteria passed\n", failures == 0 ? "OK" : "FAILED",
              10 - failures);
  return failures;
}
