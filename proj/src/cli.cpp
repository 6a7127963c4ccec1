#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tanlab/concentration.hpp"
#include "tanlab/harness.hpp"
#include "tanlab/rng.hpp"

namespace tanlab {

namespace {

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size())
    throw CLI::ValidationError("grid", "'" + text + "' is not a number");
  return v;
}

// "a:b:c" expands to {a, a+c, ..., <= b}; a bare value is a singleton.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    out.push_back(parse_number(text));
    return out;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw CLI::ValidationError("grid", "expected a:b:c, got " + text);
  const double lo = parse_number(text.substr(0, c1));
  const double hi = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
  const double step = parse_number(text.substr(c2 + 1));
  if (step <= 0.0) throw CLI::ValidationError("grid", "step must be positive");
  for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      for (double v : parse_grid(item)) out.push_back(v);
    }
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (double d : v) out.push_back(static_cast<std::size_t>(std::llround(d)));
  return out;
}

struct CommonFlags {
  std::string family = "quadratic";
  std::string m;  // empty: experiment default (5, or {5,10,15} for min-k over n)
  std::string n;
  std::string kmax;
  std::string gamma;
  std::string k;
  std::string theta;
  std::string c;
  std::string structure = "dense";
  std::size_t trials = 25;
  std::uint64_t seed = 42;
  std::string out;
  std::string svg;
  bool median = false;
  std::size_t k_cap = 10000;
  std::size_t reps = 500;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool angles) {
  cmd->add_option("--family", f.family,
                  "quadratic | smooth1_exp | smooth2_sin | smooth3_poly");
  cmd->add_option("--m", f.m, "manifold dimension (comma list for min-k)");
  cmd->add_option("--n", f.n, "ambient dimension, value or a:b:c grid");
  cmd->add_option("--kmax", f.kmax, "max curvature, value or a:b:c grid");
  if (angles) cmd->add_option("--gamma", f.gamma, "width scales, comma list");
  cmd->add_option("--k", f.k, "sample count grid a:b:c");
  cmd->add_option("--trials", f.trials, "random trials per grid point");
  cmd->add_option("--theta-bound", f.theta, "target angles in degrees, comma list");
  cmd->add_option("--structure", f.structure, "dense | diagonal");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output CSV path (default: stdout)");
  cmd->add_option("--svg", f.svg, "optional SVG chart path");
  cmd->add_flag("--median", f.median, "aggregate trials by median instead of mean");
}

ExperimentConfig make_config(const CommonFlags& f, Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.family = family_from_name(f.family);
  cfg.structure = structure_from_name(f.structure);
  if (!f.m.empty()) cfg.m_list = to_sizes(parse_list(f.m));
  if (!f.n.empty()) cfg.n_grid = to_sizes(parse_grid(f.n));
  if (!f.kmax.empty()) cfg.kmax_grid = parse_grid(f.kmax);
  if (!f.gamma.empty()) cfg.gamma_list = parse_list(f.gamma);
  if (!f.k.empty()) cfg.k_grid = to_sizes(parse_grid(f.k));
  if (!f.theta.empty()) cfg.theta_bound_deg = parse_list(f.theta);
  if (!f.c.empty()) cfg.c_list = parse_list(f.c);
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.out_path = f.out;
  cfg.svg_path = f.svg;
  cfg.use_median = f.median;
  cfg.k_cap = f.k_cap;
  cfg.reps = f.reps;
  cfg.apply_defaults_and_check();
  return cfg;
}

void emit(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output path: " + path);
  os << payload;
}

std::vector<SvgSeries> chart_series(const ExperimentConfig& cfg,
                                    const std::vector<ExperimentRecord>& records) {
  std::map<std::string, SvgSeries> by_label;
  const bool sweep = cfg.experiment == Experiment::max_nu_vs_n ||
                     cfg.experiment == Experiment::max_nu_vs_kmax ||
                     cfg.experiment == Experiment::min_k_vs_n ||
                     cfg.experiment == Experiment::min_k_vs_kmax;
  for (const auto& r : records) {
    if (r.trial != "AGGREGATE" && r.trial != "THEORY" && r.trial != "CENSORED")
      continue;
    std::ostringstream label;
    double x = 0.0, y = 0.0;
    if (sweep) {
      const bool over_n = cfg.experiment == Experiment::max_nu_vs_n ||
                          cfg.experiment == Experiment::min_k_vs_n;
      x = over_n ? static_cast<double>(r.n) : r.kmax;
      if (cfg.experiment == Experiment::max_nu_vs_n ||
          cfg.experiment == Experiment::max_nu_vs_kmax) {
        y = r.nu;
        label << "theta=" << r.theta_bound_deg;
        if (!over_n) label << " n=" << r.n;
      } else {
        y = static_cast<double>(r.K);
        label << (over_n ? "m=" : "n=") << (over_n ? r.m : r.n);
      }
    } else {
      x = static_cast<double>(r.K);
      y = r.angle_deg;
      label << (r.trial == "THEORY" ? "theory " : "") << "n=" << r.n
            << " gamma=" << r.gamma;
    }
    auto& s = by_label[label.str()];
    s.label = label.str();
    s.x.push_back(x);
    s.y.push_back(y);
  }
  std::vector<SvgSeries> out;
  for (auto& [_, s] : by_label) out.push_back(std::move(s));
  return out;
}

int run_experiment(const CommonFlags& f, Experiment e) {
  ExperimentConfig cfg = make_config(f, e);
  std::vector<ExperimentRecord> records;
  bool sweep = false;
  switch (e) {
    case Experiment::angle_vs_k: records = run_angle_vs_k(cfg); break;
    case Experiment::theory_vs_empirical:
      records = run_theory_vs_empirical(cfg);
      break;
    case Experiment::max_nu_vs_n:
    case Experiment::max_nu_vs_kmax:
      records = run_max_nu_sweep(cfg);
      sweep = true;
      break;
    case Experiment::min_k_vs_n:
    case Experiment::min_k_vs_kmax:
      records = run_min_k_sweep(cfg);
      sweep = true;
      break;
    default: throw std::logic_error("run_experiment: unreachable");
  }
  std::ostringstream csv;
  if (sweep)
    write_sweep_csv(csv, records);
  else
    write_angle_csv(csv, records);
  emit(cfg.out_path, csv.str());
  if (!cfg.svg_path.empty()) {
    std::ostringstream svg;
    const bool minl = e == Experiment::min_k_vs_n || e == Experiment::min_k_vs_kmax;
    const bool maxn = e == Experiment::max_nu_vs_n || e == Experiment::max_nu_vs_kmax;
    const std::string xlabel =
        sweep ? ((e == Experiment::max_nu_vs_n || e == Experiment::min_k_vs_n)
                     ? "n"
                     : "kmax")
              : "K";
    const std::string ylabel = maxn ? "max nu" : (minl ? "min K" : "angle (deg)");
    write_svg_chart(svg, experiment_name(e), xlabel, ylabel,
                    chart_series(cfg, records));
    emit(cfg.svg_path, svg.str());
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"tangent-space sampling laboratory"};
  app.require_subcommand(1);

  CommonFlags angle_f, theory_f, maxnu_f, mink_f;

  auto* angle = app.add_subcommand("angle-vs-k", "mean estimation angle against K");
  add_common(angle, angle_f, true);

  auto* theory = app.add_subcommand(
      "theory-vs-empirical", "bound-driven K/angle curves next to measured ones");
  add_common(theory, theory_f, false);
  theory->add_option("--c", theory_f.c, "scale parameters, comma list");

  auto* maxnu = app.add_subcommand(
      "max-nu", "largest width meeting a target angle (grid over n or kmax)");
  add_common(maxnu, maxnu_f, false);

  auto* mink = app.add_subcommand(
      "min-k", "smallest K meeting a target angle (grid over n or kmax)");
  add_common(mink, mink_f, false);
  mink->add_option("--k-cap", mink_f.k_cap, "scan ceiling for K");

  // validate-bounds
  std::string v_kind = "all";
  std::size_t v_m = 5, v_n = 100, v_K = 2000, v_reps = 500;
  double v_kmax = 10.0, v_nu = 0.0, v_s1 = 0.5, v_s2 = 2.0 * std::exp(1.0),
         v_s3 = 0.0;
  std::string v_structure = "dense", v_out;
  std::uint64_t v_seed = 42;
  auto* validate = app.add_subcommand(
      "validate-bounds", "Monte-Carlo check that tail bounds hold empirically");
  validate->add_option("--kind", v_kind, "all | chernoff_lower | chernoff_upper | bernstein");
  validate->add_option("--m", v_m);
  validate->add_option("--n", v_n);
  validate->add_option("--kmax", v_kmax);
  validate->add_option("--nu", v_nu, "sampling width (default: nu_bound_quad)");
  validate->add_option("--k", v_K, "samples per cloud");
  validate->add_option("--s1", v_s1);
  validate->add_option("--s2", v_s2);
  validate->add_option("--s3", v_s3,
                       "bernstein threshold (default: bound level 0.25)");
  validate->add_option("--reps", v_reps);
  validate->add_option("--structure", v_structure);
  validate->add_option("--seed", v_seed);
  validate->add_option("--out", v_out);

  // bounds
  std::size_t b_m = 5, b_n = 100;
  double b_kmax = 10.0, b_nu = 0.0, b_cs = 0.0, b_s1 = 0.5,
         b_s2 = 2.0 * std::exp(1.0), b_s3 = 0.0, b_tau = 0.1, b_p1 = 0.01,
         b_p2 = 0.01, b_p3 = 0.01;
  std::string b_structure = "dense", b_out;
  bool b_json = false;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "evaluate every closed-form bound at one point");
  bounds_cmd->add_option("--m", b_m);
  bounds_cmd->add_option("--n", b_n);
  bounds_cmd->add_option("--kmax", b_kmax);
  bounds_cmd->add_option("--nu", b_nu,
                         "width (default: half of sqrt(s1/s2) nu_bound_quad)");
  bounds_cmd->add_option("--cs", b_cs, "deviation constant C_s");
  bounds_cmd->add_option("--s1", b_s1);
  bounds_cmd->add_option("--s2", b_s2);
  bounds_cmd->add_option("--s3", b_s3, "(default: 0.99 of the applicable s3 bound)");
  bounds_cmd->add_option("--tau", b_tau);
  bounds_cmd->add_option("--p1", b_p1);
  bounds_cmd->add_option("--p2", b_p2);
  bounds_cmd->add_option("--p3", b_p3);
  bounds_cmd->add_option("--structure", b_structure);
  bounds_cmd->add_flag("--json", b_json);
  bounds_cmd->add_option("--out", b_out);

  // spec-dump
  std::string d_family = "quadratic", d_out;
  std::size_t d_m = 5, d_n = 100;
  double d_kmax = 10.0;
  std::uint64_t d_seed = 42;
  bool d_extreme = false;
  auto* dump = app.add_subcommand("spec-dump",
                                  "generate an embedding spec and print its JSON");
  dump->add_option("--family", d_family);
  dump->add_option("--m", d_m);
  dump->add_option("--n", d_n);
  dump->add_option("--kmax", d_kmax);
  dump->add_option("--seed", d_seed);
  dump->add_flag("--force-extreme", d_extreme,
                 "pin one curvature entry to +/-kmax");
  dump->add_option("--out", d_out);

  try {
    app.parse(argc, argv);

    if (angle->parsed()) return run_experiment(angle_f, Experiment::angle_vs_k);
    if (theory->parsed())
      return run_experiment(theory_f, Experiment::theory_vs_empirical);
    if (maxnu->parsed()) {
      const bool over_kmax =
          maxnu_f.kmax.find(':') != std::string::npos && maxnu_f.n.find(':') == std::string::npos;
      return run_experiment(maxnu_f, over_kmax ? Experiment::max_nu_vs_kmax
                                               : Experiment::max_nu_vs_n);
    }
    if (mink->parsed()) {
      const bool over_kmax =
          mink_f.kmax.find(':') != std::string::npos && mink_f.n.find(':') == std::string::npos;
      return run_experiment(mink_f, over_kmax ? Experiment::min_k_vs_kmax
                                              : Experiment::min_k_vs_n);
    }

    if (validate->parsed()) {
      const CorrelationStructure structure = structure_from_name(v_structure);
      if (v_nu <= 0.0)
        v_nu = nu_bound_quad(v_m, v_n, v_kmax, CorrelationStructure::dense);
      if (v_s3 <= 0.0)
        v_s3 = bernstein_s3_for_bound(v_m, v_n, v_kmax, v_nu, v_K, structure, 0.25);
      std::vector<TailKind> kinds;
      if (v_kind == "all")
        kinds = {TailKind::chernoff_lower, TailKind::chernoff_upper,
                 TailKind::bernstein};
      else
        kinds = {tail_kind_from_name(v_kind)};
      std::ostringstream csv;
      csv << validation_csv_header() << "\n";
      for (TailKind kind : kinds) {
        TailBoundQuery q;
        q.kind = kind;
        q.m = v_m;
        q.n = v_n;
        q.kmax = v_kmax;
        q.nu = v_nu;
        q.K = v_K;
        q.structure = structure;
        q.s1 = v_s1;
        q.s2 = v_s2;
        q.s3 = v_s3;
        const ValidationResult res = validate_tail_bounds(q, v_reps, v_seed);
        csv << validation_csv_row(q, res) << "\n";
      }
      emit(v_out, csv.str());
      return 0;
    }

    if (bounds_cmd->parsed()) {
      BoundParams p;
      p.m = b_m;
      p.n = b_n;
      p.kmax = b_kmax;
      p.cs = b_cs;
      p.s1 = b_s1;
      p.s2 = b_s2;
      p.p1 = b_p1;
      p.p2 = b_p2;
      p.p3 = b_p3;
      p.tau = b_tau;
      p.structure = structure_from_name(b_structure);
      p.nu = b_nu > 0.0 ? b_nu
                        : 0.5 * std::sqrt(b_s1 / b_s2) *
                              nu_bound_quad(b_m, b_n, b_kmax, p.structure);
      if (b_s3 > 0.0) {
        p.s3 = b_s3;
      } else {
        p.s3 = 1.0;  // placeholder so the recommendation itself can be computed
        p.s3 = 0.99 * s3_bound(p, b_cs > 0.0 ? BoundCase::smooth : BoundCase::quad);
      }
      const BoundReport report = bound_report(p);
      if (b_json) {
        emit(b_out, bound_report_json(p, report) + "\n");
      } else {
        emit(b_out,
             bound_report_csv_header() + "\n" + bound_report_csv_row(report) + "\n");
      }
      return 0;
    }

    if (dump->parsed()) {
      const EmbeddingSpec spec = make_embedding_spec(
          family_from_name(d_family), d_m, d_n, d_kmax, d_seed, d_extreme);
      emit(d_out, to_json(spec) + "\n");
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tanlab
