#include "mrdg/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mrdg {

LeafField LeafField::make(const GridConfig& cfg, int ncomp, int p, DetailTree tree) {
  cfg.validate();
  LeafField f;
  f.cfg = cfg;
  f.ncomp = ncomp;
  f.p = p;
  f.tree = std::move(tree);
  f.cells = f.tree.leaves();
  f.data.assign(f.cells.size() * static_cast<std::size_t>(f.block_size()), 0.0);
  f.slot.reserve(f.cells.size() * 2);
  for (std::size_t i = 0; i < f.cells.size(); ++i)
    f.slot.emplace(f.cells[i].key(), static_cast<int>(i));
  return f;
}

void LeafField::eval_point(const Basis& basis, double x, double xi, double* out) const {
  const int L = cfg.max_level;
  const int nx = cfg.cells_x(L), nxi = cfg.cells_xi(L);
  int jx = static_cast<int>((x - cfg.x_lo) / cfg.h_x(L));
  int jxi = static_cast<int>((xi - cfg.xi_lo) / cfg.h_xi(L));
  jx = std::clamp(jx, 0, nx - 1);
  jxi = std::clamp(jxi, 0, nxi - 1);
  auto leaf = tree.leaf_covering(CellIndex{L, jx, jxi});
  if (!leaf) throw ConfigError("field: no leaf covers evaluation point");
  const int s = find(*leaf);
  if (s < 0) throw ConfigError("field: leaf without data block");
  evaluate_block(basis, block(s), ncomp, cell_geometry(cfg, *leaf), x, xi, out);
}

void LeafField::integral(double* out) const {
  for (int c = 0; c < ncomp; ++c) out[c] = 0.0;
  const int pp = p * p;
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const double sq = std::sqrt(cell_geometry(cfg, cells[s]).area());
    const double* b = block(static_cast<int>(s));
    for (int c = 0; c < ncomp; ++c) out[c] += sq * b[c * pp];
  }
}

void write_solution_csv(std::ostream& os, const LeafField& f) {
  os << "level,ix,ixi,component,i1,i2,coefficient\n";
  char buf[96];
  for (std::size_t s = 0; s < f.cells.size(); ++s) {
    const CellIndex& c = f.cells[s];
    const double* b = f.block(static_cast<int>(s));
    for (int comp = 0; comp < f.ncomp; ++comp)
      for (int i1 = 0; i1 < f.p; ++i1)
        for (int i2 = 0; i2 < f.p; ++i2) {
          std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d,%.17g\n", c.level, c.ix,
                        c.ixi, comp, i1, i2, b[comp * f.p * f.p + i1 * f.p + i2]);
          os << buf;
        }
  }
}

void write_sampled_csv(std::ostream& os, const LeafField& f, const Basis& basis,
                       int nx, int nxi) {
  os << "x,xi,component,value\n";
  char buf[128];
  std::vector<double> vals(f.ncomp);
  const double hx = (f.cfg.x_hi - f.cfg.x_lo) / nx;
  const double hxi = (f.cfg.xi_hi - f.cfg.xi_lo) / nxi;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nxi; ++j) {
      const double x = f.cfg.x_lo + (i + 0.5) * hx;
      const double xi = f.cfg.xi_lo + (j + 0.5) * hxi;
      f.eval_point(basis, x, xi, vals.data());
      for (int c = 0; c < f.ncomp; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", x, xi, c, vals[c]);
        os << buf;
      }
    }
}

}  // namespace mrdg
