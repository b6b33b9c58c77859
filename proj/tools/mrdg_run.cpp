// Command-line driver: one adaptive run per invocation, configured by an
// optional key=value file plus flag overrides. With --ref-levels a uniform
// reference run at the finer level follows and the per-quantity L1 errors
// are reported (and written to errors.csv when --out is set).
//
// Exit codes: 0 success, 2 configuration error, 3 admissibility failure,
// 4 I/O error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "mrdg/experiment.hpp"

using namespace mrdg;

namespace {

int run(int argc, char** argv) {
  CLI::App app{
      "Adaptive multiresolution DG solver for conservation laws with one "
      "uncertain parameter"};
  std::string config_file;
  app.add_option("config", config_file, "key=value configuration file");
  std::string model, dist, mode, out;
  int levels = 0, ref_levels = 0, threads = 0;
  double cfl = 0.0, c_heuristic = 0.0, tfinal = 0.0;
  unsigned long seed = 0;
  auto* o_model = app.add_option("--model", model, "burgers | euler");
  auto* o_dist = app.add_option("--dist", dist, "density of the uncertain parameter, e.g. beta(2,5)");
  auto* o_mode = app.add_option("--mode", mode, "thresholding mode")
                     ->check(CLI::IsMember({"uniform", "weighted"}));
  auto* o_levels = app.add_option("--levels", levels, "finest refinement level L");
  auto* o_ref = app.add_option("--ref-levels", ref_levels,
                               "uniform reference level for an error report (> levels)");
  auto* o_cfl = app.add_option("--cfl", cfl, "CFL number");
  auto* o_c = app.add_option("--c-heuristic", c_heuristic, "threshold constant C");
  auto* o_t = app.add_option("--tfinal", tfinal, "end time");
  auto* o_out = app.add_option("--out", out, "artifact directory");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  auto* o_seed = app.add_option("--seed", seed, "seed for randomized harnesses");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the parser's message
    return 2;     // command-line misuse is a configuration error
  }

  ExperimentConfig cfg;
  if (!config_file.empty()) cfg = load_config(config_file);
  if (*o_model) cfg.model = model;
  if (*o_dist) cfg.dist = dist;
  if (*o_mode) cfg.mode = mode;
  if (*o_levels) cfg.levels = levels;
  if (*o_ref) cfg.ref_levels = ref_levels;
  if (*o_cfl) cfg.cfl = cfl;
  if (*o_c) cfg.c_heuristic = c_heuristic;
  if (*o_t) cfg.t_final = tfinal;
  if (*o_out) cfg.out = out;
  if (*o_threads) cfg.threads = threads;
  if (*o_seed) cfg.seed = seed;
  cfg.apply_defaults();
  cfg.validate();

  ExperimentResult res = run_experiment(cfg);
  std::printf("run: model=%s dist=%s mode=%s L=%d eps_max=%.6g\n", res.cfg.model.c_str(),
              res.cfg.dist.c_str(), res.cfg.mode.c_str(), res.cfg.levels, res.eps_max);
  std::printf("run: steps=%ld n_total=%lld final_leaves=%zu wall=%.2fs\n", res.stats.steps,
              res.stats.n_total, res.state.field.cells.size(), res.stats.wall_seconds);
  if (!res.cfg.out.empty())
    std::printf("run: %zu artifacts in %s\n", res.artifacts.size(), res.cfg.out.c_str());

  if (cfg.ref_levels > 0) {
    ExperimentConfig rcfg = res.cfg;
    rcfg.levels = cfg.ref_levels;
    rcfg.ref_levels = 0;
    rcfg.mode = "uniform";  // errors are measured against a uniform-threshold run
    rcfg.out = res.cfg.out.empty()
                   ? std::string()
                   : (std::filesystem::path(res.cfg.out) / "reference").string();
    ExperimentResult ref = run_experiment(rcfg);
    std::printf("reference: L=%d steps=%ld n_total=%lld wall=%.2fs\n", rcfg.levels,
                ref.stats.steps, ref.stats.n_total, ref.stats.wall_seconds);

    Basis basis = build_basis(3);
    QuantitySet quants = model_quantities(res.cfg.model);
    L1Report rep =
        l1_errors(res.state.field, ref.state.field, basis, res.density, quants);
    for (int q = 0; q < quants.nquant; ++q)
      std::printf("l1_error[%s]: solution=%.6e expectation=%.6e variance=%.6e\n",
                  quants.names[q].c_str(), rep.solution[q], rep.expectation[q],
                  rep.variance[q]);
    if (!res.cfg.out.empty()) {
      std::filesystem::path ep = std::filesystem::path(res.cfg.out) / "errors.csv";
      std::ofstream os(ep);
      if (!os) throw IoError("cannot open output file: " + ep.string());
      os << "quantity,solution,expectation,variance\n";
      for (int q = 0; q < quants.nquant; ++q) {
        char line[160];
        std::snprintf(line, sizeof line, "%s,%.6e,%.6e,%.6e\n", quants.names[q].c_str(),
                      rep.solution[q], rep.expectation[q], rep.variance[q]);
        os << line;
      }
      if (!os.flush()) throw IoError("write failed: " + ep.string());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const AdmissibilityError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
