#include "mrdg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mrdg/quadrature.hpp"

namespace mrdg {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not an integer: '" + v + "'");
  }
}

unsigned long parse_ulong(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long r = std::stoul(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a non-negative integer: '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: '" + v + "'");
  }
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// phi_j evaluated at the 3-point Gauss nodes of every level-`diff` sub-interval
// of a leaf's reference extent: tab[d][(sub*3 + g)*p + j].
std::vector<std::vector<double>> sub_basis_tables(const Basis& basis, int max_diff) {
  const QuadRule& q = gauss_rule(3);
  int p = basis.p;
  std::vector<std::vector<double>> tab(max_diff + 1);
  for (int d = 0; d <= max_diff; ++d) {
    int nsub = 1 << d;
    tab[d].resize(static_cast<std::size_t>(nsub) * 3 * p);
    for (int sub = 0; sub < nsub; ++sub)
      for (int g = 0; g < 3; ++g) {
        double t = (sub + q.x[g]) / nsub;
        for (int j = 0; j < p; ++j) tab[d][(sub * 3 + g) * static_cast<std::size_t>(p) + j] = basis.scaling.eval(j, t);
      }
  }
  return tab;
}

}  // namespace

void ExperimentConfig::apply_defaults() {
  if (model == "burgers") {
    if (n0_x == 0) n0_x = 8;
    if (n0_xi == 0) n0_xi = 16;
    if (t_final == 0.0) t_final = 0.35;
  } else if (model == "euler") {
    if (n0_x == 0) n0_x = 8;
    if (n0_xi == 0) n0_xi = 8;
    if (t_final == 0.0) t_final = 0.2;
  }
}

void ExperimentConfig::validate() const {
  if (model != "burgers" && model != "euler")
    throw ConfigError("config: unknown model '" + model + "' (expected burgers or euler)");
  if (mode != "uniform" && mode != "weighted")
    throw ConfigError("config: unknown threshold mode '" + mode + "' (expected uniform or weighted)");
  if (levels < 0 || levels > 14)
    throw ConfigError("config: levels must lie in [0, 14], got " + std::to_string(levels));
  if (ref_levels != 0 && ref_levels <= levels)
    throw ConfigError("config: ref_levels must exceed levels for an error study (got " +
                      std::to_string(ref_levels) + " vs levels " + std::to_string(levels) + ")");
  if (n0_x < 1 || n0_xi < 1)
    throw ConfigError("config: base grid must be at least 1x1 (set model for defaults)");
  if (!(cfl > 0.0)) throw ConfigError("config: cfl must be positive");
  if (!(c_heuristic > 0.0)) throw ConfigError("config: c_heuristic must be positive");
  if (!(beta > 0.0)) throw ConfigError("config: beta must be positive");
  if (!(t_final > 0.0)) throw ConfigError("config: t_final must be positive");
  if (threads < 1) throw ConfigError("config: threads must be at least 1");
  Distribution::parse(dist);  // throws on malformed spec
  GridConfig g;
  g.n0_x = n0_x;
  g.n0_xi = n0_xi;
  g.max_level = std::max(levels, ref_levels);
  g.validate();
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model")
    cfg.model = value;
  else if (key == "dist")
    cfg.dist = value;
  else if (key == "mode")
    cfg.mode = value;
  else if (key == "levels")
    cfg.levels = parse_int(key, value);
  else if (key == "ref_levels")
    cfg.ref_levels = parse_int(key, value);
  else if (key == "n0_x")
    cfg.n0_x = parse_int(key, value);
  else if (key == "n0_xi")
    cfg.n0_xi = parse_int(key, value);
  else if (key == "cfl")
    cfg.cfl = parse_double(key, value);
  else if (key == "c_heuristic")
    cfg.c_heuristic = parse_double(key, value);
  else if (key == "beta")
    cfg.beta = parse_double(key, value);
  else if (key == "t_final")
    cfg.t_final = parse_double(key, value);
  else if (key == "threads")
    cfg.threads = parse_int(key, value);
  else if (key == "seed")
    cfg.seed = parse_ulong(key, value);
  else if (key == "out")
    cfg.out = value;
  else
    throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config " + path + ":" + std::to_string(lineno) + ": expected key=value");
    set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_items(const ExperimentConfig& cfg) {
  return {
      {"model", cfg.model},
      {"dist", cfg.dist},
      {"mode", cfg.mode},
      {"levels", std::to_string(cfg.levels)},
      {"ref_levels", std::to_string(cfg.ref_levels)},
      {"n0_x", std::to_string(cfg.n0_x)},
      {"n0_xi", std::to_string(cfg.n0_xi)},
      {"cfl", fmt_num(cfg.cfl)},
      {"c_heuristic", fmt_num(cfg.c_heuristic)},
      {"beta", fmt_num(cfg.beta)},
      {"t_final", fmt_num(cfg.t_final)},
      {"threads", std::to_string(cfg.threads)},
      {"seed", std::to_string(cfg.seed)},
      {"out", cfg.out},
  };
}

QuantitySet model_quantities(const std::string& model, double gamma) {
  QuantitySet q;
  if (model == "euler") {
    q.nquant = 5;
    q.names = {"rho", "rhov", "rhoE", "v", "p"};
    q.map = [gamma](const double* s, double* out) {
      out[0] = s[0];
      out[1] = s[1];
      out[2] = s[2];
      out[3] = s[1] / s[0];
      out[4] = euler_pressure(s, gamma);
    };
  } else {
    q.nquant = 1;
    q.names = {"u"};
  }
  return q;
}

namespace {

template <class Fn>
void write_artifact(const std::filesystem::path& path, std::vector<std::string>& names, Fn fn) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open output file: " + path.string());
  fn(os);
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
  names.push_back(path.filename().string());
}

// The Burgers study evaluates these densities in post-processing from the
// single uniform-threshold run; a weighted run is tied to its own density.
std::vector<Distribution> moment_densities(const ExperimentConfig& cfg) {
  std::vector<Distribution> ds;
  ds.push_back(Distribution::parse(cfg.dist));
  if (cfg.model == "burgers" && cfg.mode == "uniform") {
    for (const char* text : {"uniform", "normal(0.5,0.15)", "beta(2,5)", "beta(2,20)"}) {
      Distribution d = Distribution::parse(text);
      if (d.name() != ds.front().name()) ds.push_back(d);
    }
  }
  return ds;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentResult res;
  res.cfg = cfg_in;
  res.cfg.apply_defaults();
  res.cfg.validate();
  const ExperimentConfig& cfg = res.cfg;

  res.grid.n0_x = cfg.n0_x;
  res.grid.n0_xi = cfg.n0_xi;
  res.grid.max_level = cfg.levels;
  res.grid.validate();
  res.density = Distribution::parse(cfg.dist);

  Basis basis = build_basis(3);
  ModelSpec model = cfg.model == "euler" ? euler_model() : burgers_model();
  ThresholdPolicy policy =
      cfg.mode == "weighted"
          ? ThresholdPolicy::weighted(res.grid, res.density, cfg.c_heuristic, cfg.beta)
          : ThresholdPolicy::uniform(res.grid, cfg.c_heuristic, cfg.beta);
  res.eps_max = policy.epsilon_max;

  SolverOptions opt;
  opt.cfl = cfg.cfl;
  opt.nthreads = cfg.threads;
  res.state = initialize(res.grid, basis, model, policy, opt);
  res.stats = run(res.state, basis, model, policy, cfg.t_final, opt);

  if (cfg.out.empty()) return res;

  namespace fs = std::filesystem;
  fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  const LeafField& f = res.state.field;
  write_artifact(dir / "grid.csv", res.artifacts,
                 [&](std::ostream& os) { write_grid_csv(os, f.tree); });
  write_artifact(dir / "solution.csv", res.artifacts,
                 [&](std::ostream& os) { write_solution_csv(os, f); });
  int nx = std::min(res.grid.cells_x(cfg.levels), 256);
  int nxi = std::min(res.grid.cells_xi(cfg.levels), 256);
  write_artifact(dir / "sampled.csv", res.artifacts,
                 [&](std::ostream& os) { write_sampled_csv(os, f, basis, nx, nxi); });

  QuantitySet quants = model_quantities(cfg.model, model.gamma);
  for (const Distribution& d : moment_densities(cfg)) {
    MomentField mf = compute_moments(f, basis, d, {}, quants.nquant, quants.map);
    for (int q = 0; q < quants.nquant; ++q)
      write_artifact(dir / ("moments_" + d.name() + "_" + quants.names[q] + ".csv"),
                     res.artifacts, [&](std::ostream& os) { write_moments_csv(os, mf, q); });
  }

  write_artifact(dir / "cells_per_step.csv", res.artifacts, [&](std::ostream& os) {
    os << "step,leaves\n";
    for (std::size_t i = 0; i < res.state.leaves_per_step.size(); ++i)
      os << i + 1 << ',' << res.state.leaves_per_step[i] << '\n';
  });

  write_artifact(dir / "run_info.txt", res.artifacts, [&](std::ostream& os) {
    for (const auto& [k, v] : config_items(cfg)) os << k << " = " << v << '\n';
    os << "distribution = " << res.density.describe() << '\n';
    os << "epsilon_max = " << fmt_num(res.eps_max) << '\n';
    os << "steps = " << res.stats.steps << '\n';
    os << "n_total = " << res.stats.n_total << '\n';
    os << "final_time = " << fmt_num(res.state.t) << '\n';
    os << "final_leaves = " << f.cells.size() << '\n';
    os << "wall_seconds = " << fmt_num(res.stats.wall_seconds) << '\n';
  });

  write_artifact(dir / "manifest.txt", res.artifacts, [&](std::ostream& os) {
    os << "# resolved configuration\n";
    for (const auto& [k, v] : config_items(cfg)) os << k << " = " << v << '\n';
    os << "# artifacts\n";
    for (const std::string& a : res.artifacts) os << a << '\n';
    os << "manifest.txt\n";
  });
  return res;
}

L1Report l1_errors(const LeafField& run, const LeafField& ref, const Basis& basis,
                   const Distribution& dist, const QuantitySet& quants_in) {
  const GridConfig& gr = run.cfg;
  const GridConfig& gf = ref.cfg;
  if (gr.x_lo != gf.x_lo || gr.x_hi != gf.x_hi || gr.xi_lo != gf.xi_lo ||
      gr.xi_hi != gf.xi_hi || gr.n0_x != gf.n0_x || gr.n0_xi != gf.n0_xi)
    throw ConfigError("l1_errors: run and reference live on different domains/base grids");
  if (gf.max_level < gr.max_level)
    throw ConfigError("l1_errors: reference hierarchy is coarser than the run");
  if (run.ncomp != ref.ncomp) throw ConfigError("l1_errors: component count mismatch");

  QuantitySet quants = quants_in;
  if (quants.nquant == 0) quants.nquant = run.ncomp;
  const int nq = quants.nquant;
  const int p = run.p;
  const int Lr = gf.max_level;
  const QuadRule& q3 = gauss_rule(3);
  auto tab = sub_basis_tables(basis, Lr);

  std::vector<double> inv_sqrt_area(Lr + 1);
  for (int l = 0; l <= Lr; ++l) inv_sqrt_area[l] = 1.0 / std::sqrt(gf.cell_area(l));

  L1Report rep;
  rep.solution.assign(nq, 0.0);
  rep.expectation.assign(nq, 0.0);
  rep.variance.assign(nq, 0.0);

  // Solution error: 3x3 Gauss on every cell of the reference's finest
  // uniform raster; each raster cell lies inside one leaf of each field.
  const int nxr = gf.cells_x(Lr), nxir = gf.cells_xi(Lr);
  const double raster_area = gf.cell_area(Lr);
  std::vector<double> srun(run.ncomp), sref(run.ncomp), qrun(nq), qref(nq);
  auto eval = [&](const LeafField& f, const CellIndex& leaf, int slot, int rx, int rxi,
                  int gx, int gxi, double* out) {
    int d = Lr - leaf.level;
    const double* bx = &tab[d][((rx - (leaf.ix << d)) * 3 + gx) * static_cast<std::size_t>(p)];
    const double* bxi = &tab[d][((rxi - (leaf.ixi << d)) * 3 + gxi) * static_cast<std::size_t>(p)];
    const double* blk = f.block(slot);
    double scale = inv_sqrt_area[leaf.level];
    for (int c = 0; c < f.ncomp; ++c) {
      double acc = 0.0;
      const double* b = blk + c * p * p;
      for (int i1 = 0; i1 < p; ++i1)
        for (int i2 = 0; i2 < p; ++i2) acc += b[i1 * p + i2] * bx[i1] * bxi[i2];
      out[c] = acc * scale;
    }
  };
  for (int rx = 0; rx < nxr; ++rx)
    for (int rxi = 0; rxi < nxir; ++rxi) {
      CellIndex rc{Lr, rx, rxi};
      // the raster may be finer than the run's hierarchy allows; look up its
      // ancestor inside the run's own level range
      auto lr = run.tree.leaf_covering(ancestor_at(rc, std::min(Lr, gr.max_level)));
      auto lf = ref.tree.leaf_covering(rc);
      if (!lr || !lf) throw ConfigError("l1_errors: raster cell not covered by a leaf");
      int sr = run.find(*lr), sf = ref.find(*lf);
      for (int gx = 0; gx < 3; ++gx)
        for (int gxi = 0; gxi < 3; ++gxi) {
          eval(run, *lr, sr, rx, rxi, gx, gxi, srun.data());
          eval(ref, *lf, sf, rx, rxi, gx, gxi, sref.data());
          if (quants.map) {
            quants.map(srun.data(), qrun.data());
            quants.map(sref.data(), qref.data());
          } else {
            qrun.assign(srun.begin(), srun.end());
            qref.assign(sref.begin(), sref.end());
          }
          double w = q3.w[gx] * q3.w[gxi] * raster_area;
          for (int k = 0; k < nq; ++k) rep.solution[k] += w * std::abs(qrun[k] - qref[k]);
        }
    }

  // Moment errors: density-weighted expectation/variance on 3-point Gauss
  // abscissae of every raster column, L1 in x.
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(nxr) * 3);
  double hx = gf.h_x(Lr);
  for (int rx = 0; rx < nxr; ++rx)
    for (int g = 0; g < 3; ++g) xs.push_back(gf.x_lo + (rx + q3.x[g]) * hx);
  MomentField mrun = compute_moments(run, basis, dist, xs, nq, quants.map);
  MomentField mref = compute_moments(ref, basis, dist, xs, nq, quants.map);
  for (int rx = 0; rx < nxr; ++rx)
    for (int g = 0; g < 3; ++g) {
      int i = rx * 3 + g;
      double w = q3.w[g] * hx;
      for (int k = 0; k < nq; ++k) {
        rep.expectation[k] += w * std::abs(mrun.mean_at(i, k) - mref.mean_at(i, k));
        rep.variance[k] += w * std::abs(mrun.variance_at(i, k) - mref.variance_at(i, k));
      }
    }
  return rep;
}

EocTable eoc_table(const std::vector<std::pair<int, std::vector<double>>>& errors_by_level,
                   const std::vector<std::string>& columns) {
  auto sorted = errors_by_level;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EocTable t;
  t.columns = columns;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].second.size() != columns.size())
      throw ConfigError("eoc_table: row width does not match column labels");
    EocRow row;
    row.levels = sorted[i].first;
    row.err = sorted[i].second;
    row.eoc.assign(columns.size(), nan);
    if (i > 0 && sorted[i].first == sorted[i - 1].first + 1) {
      for (std::size_t k = 0; k < columns.size(); ++k) {
        double prev = sorted[i - 1].second[k], cur = sorted[i].second[k];
        if (prev > 0.0 && cur > 0.0 && std::isfinite(prev) && std::isfinite(cur))
          row.eoc[k] = std::log2(prev / cur);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string eoc_str(double v) {
  if (!std::isfinite(v)) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string err_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

}  // namespace

std::string format_eoc_table(const EocTable& table) {
  std::ostringstream os;
  os << "  L";
  for (const std::string& c : table.columns)
    os << "  " << c << "_err      " << c << "_eoc";
  os << '\n';
  for (const EocRow& r : table.rows) {
    char lvl[8];
    std::snprintf(lvl, sizeof lvl, "%3d", r.levels);
    os << lvl;
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
      std::string e = err_str(r.err[k]), o = eoc_str(r.eoc[k]);
      os << "  " << e << "  ";
      for (std::size_t pad = o.size(); pad < 7; ++pad) os << ' ';
      os << o;
    }
    os << '\n';
  }
  return os.str();
}

void write_eoc_csv(std::ostream& os, const EocTable& table) {
  os << "levels";
  for (const std::string& c : table.columns) os << ',' << c << "_err," << c << "_eoc";
  os << '\n';
  for (const EocRow& r : table.rows) {
    os << r.levels;
    for (std::size_t k = 0; k < table.columns.size(); ++k)
      os << ',' << err_str(r.err[k]) << ',' << eoc_str(r.eoc[k]);
    os << '\n';
  }
}

CellRatio cell_ratio(const SolverState& uniform_run, const SolverState& weighted_run) {
  CellRatio r;
  r.n_uniform = uniform_run.n_total;
  r.n_weighted = weighted_run.n_total;
  r.ratio = r.n_weighted > 0 ? static_cast<double>(r.n_uniform) / static_cast<double>(r.n_weighted)
                             : std::numeric_limits<double>::quiet_NaN();
  r.per_step_uniform = uniform_run.leaves_per_step;
  r.per_step_weighted = weighted_run.leaves_per_step;
  return r;
}

}  // namespace mrdg
