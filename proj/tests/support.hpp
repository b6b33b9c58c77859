#pragma once

// Shared oracle utilities for the test suite: independent quadrature-based
// integration/projection plus seeded random tree/field generators. These are
// deliberately written against the public basis evaluation API only, so the
// transform and solver implementations are checked against a second path.

#include <functional>
#include <random>
#include <vector>

#include "mrdg/basis.hpp"
#include "mrdg/field.hpp"
#include "mrdg/grid.hpp"
#include "mrdg/quadrature.hpp"

namespace testsup {

using mrdg::Basis;
using mrdg::CellIndex;
using mrdg::DetailTree;
using mrdg::GridConfig;
using mrdg::LeafField;
using mrdg::Rect;

using Scalar2D = std::function<double(double, double)>;

inline double integrate1d(const std::function<double(double)>& f, double lo, double hi,
                          int n = 12) {
  const mrdg::QuadRule& q = mrdg::gauss_rule(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += q.w[i] * f(lo + (hi - lo) * q.x[i]);
  return acc * (hi - lo);
}

inline double integrate2d(const Scalar2D& f, const Rect& r, int n = 8) {
  const mrdg::QuadRule& q = mrdg::gauss_rule(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      acc += q.w[i] * q.w[j] *
             f(r.x0 + (r.x1 - r.x0) * q.x[i], r.xi0 + (r.xi1 - r.xi0) * q.x[j]);
  return acc * r.area();
}

// Random graded tree built top-down (graded by construction).
inline DetailTree random_tree(const GridConfig& cfg, std::mt19937& rng,
                              double pr0 = 0.6, double decay = 0.75) {
  DetailTree t(cfg);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CellIndex> frontier;
  for (int ix = 0; ix < cfg.n0_x; ++ix)
    for (int ixi = 0; ixi < cfg.n0_xi; ++ixi) frontier.push_back({0, ix, ixi});
  double pr = pr0;
  for (int l = 0; l < cfg.max_level; ++l, pr *= decay) {
    std::vector<CellIndex> next;
    for (const CellIndex& c : frontier)
      if (u(rng) < pr) {
        t.mark(c);
        for (const CellIndex& ch : children(cfg, c)) next.push_back(ch);
      }
    frontier.swap(next);
  }
  return t;
}

// L2 projection of smooth component functions onto the leaves of a tree,
// by per-cell Gauss quadrature against the orthonormal cell basis.
inline LeafField project_field(const GridConfig& cfg, const Basis& basis,
                               const std::vector<Scalar2D>& comps, DetailTree tree,
                               int nq = 8) {
  const int ncomp = static_cast<int>(comps.size());
  const int p = basis.p;
  LeafField f = LeafField::make(cfg, ncomp, p, std::move(tree));
  const mrdg::QuadRule& q = mrdg::gauss_rule(nq);
  std::vector<double> phi(nq * p);
  for (int a = 0; a < nq; ++a)
    for (int j = 0; j < p; ++j) phi[a * p + j] = basis.scaling.eval(j, q.x[a]);
  for (std::size_t s = 0; s < f.cells.size(); ++s) {
    const Rect r = cell_geometry(cfg, f.cells[s]);
    const double sq = std::sqrt(r.area());
    double* blk = f.block(static_cast<int>(s));
    for (int a = 0; a < nq; ++a)
      for (int b = 0; b < nq; ++b) {
        const double x = r.x0 + (r.x1 - r.x0) * q.x[a];
        const double xi = r.xi0 + (r.xi1 - r.xi0) * q.x[b];
        const double wab = q.w[a] * q.w[b];
        for (int c = 0; c < ncomp; ++c) {
          const double fv = wab * comps[c](x, xi);
          for (int i1 = 0; i1 < p; ++i1)
            for (int i2 = 0; i2 < p; ++i2)
              blk[c * p * p + i1 * p + i2] += fv * phi[a * p + i1] * phi[b * p + i2];
        }
      }
    // <f, phi/sqrt(A)>_cell = acc * A / sqrt(A)
    for (int k = 0; k < f.block_size(); ++k) blk[k] *= sq;
  }
  return f;
}

// Random coefficient field with iid uniform [-1,1] entries on a tree.
inline LeafField random_field(const GridConfig& cfg, const Basis& basis, int ncomp,
                              DetailTree tree, std::mt19937& rng) {
  LeafField f = LeafField::make(cfg, ncomp, basis.p, std::move(tree));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f.data) v = u(rng);
  return f;
}

// Evaluate the 2-D tensor detail function (type e, index (j1,j2)) of a cell,
// normalized per cell, at a physical point inside the cell.
inline double eval_detail_function(const Basis& basis, const Rect& r, int e, int j1,
                                   int j2, double x, double xi) {
  const double tx = (x - r.x0) / (r.x1 - r.x0);
  const double txi = (xi - r.xi0) / (r.xi1 - r.xi0);
  const double fx =
      (e == 0 || e == 2) ? basis.wavelet.eval(j1, tx) : basis.scaling.eval(j1, tx);
  const double fxi =
      (e == 1 || e == 2) ? basis.wavelet.eval(j2, txi) : basis.scaling.eval(j2, txi);
  return fx * fxi / std::sqrt(r.area());
}

}  // namespace testsup
