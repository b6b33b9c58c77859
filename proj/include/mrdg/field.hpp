#pragma once

// Piecewise-polynomial DG solution attached to the leaves of a detail tree.
// Per-cell modal coefficient block layout: [comp][i1*p + i2] where i1/i2 are
// the x/xi polynomial degrees, with respect to the per-cell L2-orthonormal
// tensor basis phi_{i1}(x_hat) phi_{i2}(xi_hat) / sqrt(cell area).

#include <ostream>
#include <unordered_map>
#include <vector>

#include "mrdg/basis.hpp"
#include "mrdg/grid.hpp"

namespace mrdg {

struct LeafField {
  GridConfig cfg;
  int ncomp = 1;
  int p = 3;
  DetailTree tree;
  std::vector<CellIndex> cells;  // sorted leaves of tree
  std::vector<double> data;      // cells.size() * block_size()
  std::unordered_map<std::uint64_t, int> slot;

  int block_size() const { return ncomp * p * p; }
  double* block(int s) { return data.data() + static_cast<std::size_t>(s) * block_size(); }
  const double* block(int s) const {
    return data.data() + static_cast<std::size_t>(s) * block_size();
  }
  // Slot of a leaf cell, or -1.
  int find(const CellIndex& c) const {
    auto it = slot.find(c.key());
    return it == slot.end() ? -1 : it->second;
  }

  // Zero-initialized field on the leaves of the given (graded) tree.
  static LeafField make(const GridConfig& cfg, int ncomp, int p, DetailTree tree);

  // Evaluate all components at a physical point (leaf lookup + basis eval).
  void eval_point(const Basis& basis, double x, double xi, double* out) const;

  // Total integral of each component over the domain (sum of c00*sqrt(area)).
  void integral(double* out) const;
};

// Modal dump: `level,ix,ixi,component,i1,i2,coefficient`, cells sorted by
// (level, ix, ixi), then component, i1, i2.
void write_solution_csv(std::ostream& os, const LeafField& f);

// Point samples on a uniform nx-by-nxi raster of cell centers:
// `x,xi,component,value`.
void write_sampled_csv(std::ostream& os, const LeafField& f, const Basis& basis,
                       int nx, int nxi);

}  // namespace mrdg
