#pragma once

// Dyadic grid hierarchy on the rectangle Omega = [x_lo,x_hi] x [xi_lo,xi_hi].
// The first direction is physical space, the second the uncertain parameter.
// Refinement is isotropic and dyadic: every refined cell has four children.
// The adaptive grid is encoded as a "detail tree": a cell is marked when it
// is refined (equivalently, when its detail block is kept); the leaves of a
// graded tree tile Omega.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "mrdg/errors.hpp"

namespace mrdg {

enum class BoundaryMode { periodic, clamped };

struct GridConfig {
  double x_lo = 0.0, x_hi = 1.0;    // physical extent
  double xi_lo = 0.0, xi_hi = 1.0;  // stochastic extent
  int n0_x = 1, n0_xi = 1;          // level-0 cell counts per direction
  int max_level = 0;                // finest refinement level L

  void validate() const;

  int cells_x(int level) const { return n0_x << level; }
  int cells_xi(int level) const { return n0_xi << level; }
  double h_x(int level) const { return (x_hi - x_lo) / cells_x(level); }
  double h_xi(int level) const { return (xi_hi - xi_lo) / cells_xi(level); }
  // By convention the scalar mesh size h_l of a level is its x-width.
  double h(int level) const { return h_x(level); }
  double cell_area(int level) const { return h_x(level) * h_xi(level); }
};

struct CellIndex {
  int level = 0;
  int ix = 0;
  int ixi = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend bool operator<(const CellIndex& a, const CellIndex& b) {
    if (a.level != b.level) return a.level < b.level;
    if (a.ix != b.ix) return a.ix < b.ix;
    return a.ixi < b.ixi;
  }
  // Packed key for hashing; valid for levels/cell counts used here.
  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(level) << 58) |
           (static_cast<std::uint64_t>(ix) << 29) |
           static_cast<std::uint64_t>(ixi);
  }
};

struct Rect {
  double x0, x1, xi0, xi1;
  double area() const { return (x1 - x0) * (xi1 - xi0); }
};

std::string cell_str(const CellIndex& c);

// Bounds-check a cell index against the hierarchy; throws ConfigError.
void check_cell(const GridConfig& cfg, const CellIndex& c);

// The four children of a refined cell, ordered x-fastest:
// (2ix,2ixi), (2ix+1,2ixi), (2ix,2ixi+1), (2ix+1,2ixi+1).
std::array<CellIndex, 4> children(const GridConfig& cfg, const CellIndex& c);

CellIndex parent(const CellIndex& c);

// Ancestor of c at the given coarser (or equal) level.
CellIndex ancestor_at(const CellIndex& c, int level);

Rect cell_geometry(const GridConfig& cfg, const CellIndex& c);

// Same-level neighbors in the x direction only (the stochastic direction
// carries no flux and needs no neighbor stencils). Periodic wraps; clamped
// drops out-of-domain neighbors.
std::vector<CellIndex> spatial_neighbors(const GridConfig& cfg, const CellIndex& c,
                                         BoundaryMode mode);

// Set of refined cells, one hash set per level 0..max_level-1.
class DetailTree {
 public:
  DetailTree() = default;
  explicit DetailTree(const GridConfig& cfg);

  const GridConfig& config() const { return cfg_; }

  bool marked(const CellIndex& c) const;
  void mark(const CellIndex& c);
  void unmark(const CellIndex& c);
  // Cells marked at one level, sorted by (ix, ixi).
  std::vector<CellIndex> marked_at(int level) const;
  std::size_t marked_count() const;
  int finest_marked_level() const;  // -1 when nothing is marked

  // A cell is a leaf when it belongs to the grid and is not refined.
  // Assumes a graded tree.
  bool is_leaf(const CellIndex& c) const;

  // Leaf cells of the adaptive grid, sorted by (level, ix, ixi).
  std::vector<CellIndex> leaves() const;
  std::size_t leaf_count() const;

  // The leaf whose region contains cell c's region (level <= c.level), or
  // nullopt when c's region is subdivided into finer leaves.
  std::optional<CellIndex> leaf_covering(const CellIndex& c) const;

  // All leaves inside cell c's region (c itself when c is a leaf).
  void leaves_under(const CellIndex& c, std::vector<CellIndex>& out) const;

  // Ancestor closure: every marked cell's parent becomes marked.
  // Idempotent and monotone (only adds marks).
  void grade();
  bool is_graded() const;

  friend bool operator==(const DetailTree& a, const DetailTree& b) {
    return a.levels_ == b.levels_;
  }

 private:
  GridConfig cfg_;
  std::vector<std::unordered_set<std::uint64_t>> levels_;
};

// Leaf dump: header `level,ix,ixi,x0,x1,xi0,xi1`, rows sorted by
// (level, ix, ixi).
void write_grid_csv(std::ostream& os, const DetailTree& tree);

// Fully refined tree: every cell below the finest level is marked, so the
// leaves form the uniform grid at cfg.max_level.
DetailTree full_tree(const GridConfig& cfg);

}  // namespace mrdg
