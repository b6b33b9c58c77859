#pragma once

// Experiment driver: run configuration (file + programmatic), full adaptive
// runs with plot-ready artifacts on disk, L1 error measurement against a
// finer reference run, EOC tables, and grid-compression statistics.

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mrdg/moments.hpp"
#include "mrdg/solver.hpp"

namespace mrdg {

struct ExperimentConfig {
  std::string model = "burgers";  // "burgers" | "euler"
  std::string dist = "uniform";   // Distribution::parse form
  std::string mode = "uniform";   // thresholding: "uniform" | "weighted"
  int levels = 3;                 // finest refinement level L of this run
  int ref_levels = 0;             // reference level (0 = no reference)
  int n0_x = 0, n0_xi = 0;        // base grid; 0 = model default
  double cfl = 0.1;
  double c_heuristic = 0.1;       // C in eps_max = C * h_L^beta
  double beta = 1.0;              // threshold exponent
  double t_final = 0.0;           // end time; 0 = model default
  int threads = 1;
  unsigned long seed = 0;         // consumed only by randomized harnesses
  std::string out;                // artifact directory; empty = nothing written

  // Model-dependent defaults: burgers (8,16) grid to T=0.35,
  // euler (8,8) to T=0.2.
  void apply_defaults();
  void validate() const;  // throws ConfigError; call after apply_defaults
};

// Flat key=value text (one pair per line, '#' comments). Unknown keys and
// malformed values throw ConfigError.
ExperimentConfig load_config(const std::string& path);
void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// Resolved config as ordered key->value text fields (manifest/run_info).
std::vector<std::pair<std::string, std::string>> config_items(const ExperimentConfig& cfg);

struct ExperimentResult {
  ExperimentConfig cfg;  // resolved
  GridConfig grid;
  Distribution density = Distribution::uniform(0.0, 1.0);
  double eps_max = 0.0;
  SolverState state;  // final adaptive solution
  RunStats stats;
  std::vector<std::string> artifacts;  // file names written under cfg.out
};

// Derived output quantities of a model: identity components, plus velocity
// and pressure for "euler". Used for moments files and error columns.
struct QuantitySet {
  int nquant = 0;
  std::vector<std::string> names;
  QuantityMap map;  // empty = identity
};
QuantitySet model_quantities(const std::string& model, double gamma = 1.4);

// Runs the configured experiment and (when cfg.out is non-empty) writes:
//   grid.csv            leaf cells of the final grid
//   solution.csv        modal coefficients (level,ix,ixi,component,i1,i2,...)
//   sampled.csv         x,xi,component,value on a uniform plot raster
//   moments_<dist>_<quantity>.csv   per distribution evaluated
//   cells_per_step.csv  step,leaves
//   run_info.txt        key=value metadata (config, steps, N_total, timing)
//   manifest.txt        resolved config + artifact list
// A burgers run with uniform thresholding evaluates all four study
// distributions in post-processing; other runs evaluate cfg.dist only.
// I/O failures throw IoError with the offending path.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// L1 errors of `run` against `ref` on ref's finest uniform raster (3x3 Gauss
// per raster cell). Solution errors integrate |q(u) - q(u_ref)| over the
// whole domain; expectation/variance errors integrate the density-weighted
// moment differences over the x-domain. Both fields must share the base grid
// and domain, and ref must be at least as deep; ConfigError otherwise.
struct L1Report {
  std::vector<double> solution;     // per quantity
  std::vector<double> expectation;  // per quantity
  std::vector<double> variance;     // per quantity
};
L1Report l1_errors(const LeafField& run, const LeafField& ref, const Basis& basis,
                   const Distribution& dist, const QuantitySet& quants = {});

// Empirical orders between consecutive rows: eoc = log2(err_prev/err_this).
// Undefined entries (first row, zero errors) are quiet NaN and print as "--".
struct EocRow {
  int levels = 0;
  std::vector<double> err;
  std::vector<double> eoc;
};
struct EocTable {
  std::vector<std::string> columns;
  std::vector<EocRow> rows;
};
EocTable eoc_table(const std::vector<std::pair<int, std::vector<double>>>& errors_by_level,
                   const std::vector<std::string>& columns);
std::string format_eoc_table(const EocTable& table);     // aligned text
void write_eoc_csv(std::ostream& os, const EocTable& table);

// Grid-compression statistic of paired runs: N_total(uniform)/N_total(weighted)
// plus the per-step leaf-count series for plotting.
struct CellRatio {
  double ratio = 0.0;
  long long n_uniform = 0, n_weighted = 0;
  std::vector<long> per_step_uniform, per_step_weighted;
};
CellRatio cell_ratio(const SolverState& uniform_run, const SolverState& weighted_run);

}  // namespace mrdg
