#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tanlab/bounds.hpp"
#include "tanlab/manifold.hpp"

namespace tanlab {

enum class Experiment {
  angle_vs_k,
  theory_vs_empirical,
  max_nu_vs_n,
  max_nu_vs_kmax,
  min_k_vs_n,
  min_k_vs_kmax,
  validate_bounds,
};

std::string experiment_name(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::angle_vs_k;
  Family family = Family::quadratic;
  std::vector<std::size_t> m_list;       // most experiments use the first entry
  std::vector<std::size_t> n_grid;
  std::vector<double> kmax_grid;
  std::vector<double> gamma_list;
  std::vector<std::size_t> k_grid;
  std::size_t trials = 25;
  std::vector<double> theta_bound_deg;
  CorrelationStructure structure = CorrelationStructure::dense;
  std::uint64_t seed = 42;
  std::string out_path;   // empty: stream to stdout
  std::string svg_path;   // empty: no chart
  bool json = false;      // bounds subcommand only
  bool use_median = false;
  std::size_t k_cap = 10000;      // min-k scan ceiling
  std::size_t max_nu_steps = 200; // max-nu reduction step limit
  std::vector<double> c_list;     // theory-vs-empirical scale parameters
  std::size_t reps = 500;         // validate-bounds repetitions

  // Fills any empty grid with the experiment's default and checks that the
  // filled grids are non-empty and strictly increasing.
  void apply_defaults_and_check();
};

struct ExperimentRecord {
  std::string experiment;
  std::string family;
  std::size_t m = 0;
  std::size_t n = 0;
  double kmax = 0.0;
  std::string structure;
  double gamma = 0.0;
  double nu = 0.0;
  std::size_t K = 0;
  std::string trial;  // "0".."T-1", "AGGREGATE", "THEORY" or "CENSORED"
  double angle_deg = 0.0;
  double theta_bound_deg = 0.0;  // sweep experiments only
};

std::vector<ExperimentRecord> run_angle_vs_k(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_theory_vs_empirical(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_max_nu_sweep(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_min_k_sweep(const ExperimentConfig& cfg);

// experiment,family,m,n,kmax,structure,gamma,nu,K,trial,angle_deg
void write_angle_csv(std::ostream& os, const std::vector<ExperimentRecord>& records);
// experiment,family,m,n,kmax,structure,theta_bound_deg,gamma,nu,K,trial,angle_deg
void write_sweep_csv(std::ostream& os, const std::vector<ExperimentRecord>& records);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

void write_svg_chart(std::ostream& os, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series);

int cli_main(int argc, char** argv);

namespace detail {
// Mean angle in degrees over `trials` clouds at the given width; streams are
// derived from (seed, salt, trial), so grid points are order-independent.
double mean_trial_angle(const EmbeddingSpec& spec, double nu, std::size_t K,
                        std::size_t trials, std::uint64_t seed, std::uint64_t salt,
                        bool use_median);
}  // namespace detail

}  // namespace tanlab
