#pragma once

// Multiscale (multiwavelet) transform between leaf coefficients and the
// hierarchical representation: level-0 scaling blocks plus one detail block
// per refined cell. Detail block layout: [comp][e][i1*p + i2] with the three
// tensor detail types ordered
//   e = 0 : wavelet in x, scaling in xi
//   e = 1 : scaling in x, wavelet in xi
//   e = 2 : wavelet in both directions
// For p = 3 that is 9 scaling coefficients and 27 detail coefficients per
// cell and component. The transform is an isometry (orthonormal masks).

#include <vector>

#include "mrdg/distribution.hpp"
#include "mrdg/field.hpp"

namespace mrdg {

enum class ThresholdMode { uniform, weighted };

struct MultiscaleState {
  GridConfig cfg;
  int ncomp = 1;
  int p = 3;
  DetailTree tree;  // refined cells; each carries scaling + detail blocks

  MultiscaleState() = default;
  // Allocate zeroed storage for every marked cell of `tree`.
  MultiscaleState(const GridConfig& cfg, int ncomp, int p, DetailTree tree);

  // Dense level-0 scaling blocks, index (ix * n0_xi + ixi) * ncomp * p^2.
  std::vector<double> level0;

  struct Level {
    std::vector<CellIndex> cells;  // sorted marked cells of this level
    std::unordered_map<std::uint64_t, int> slot;
    std::vector<double> scaling;  // per cell: ncomp * p^2 (child aggregate)
    std::vector<double> detail;   // per cell: ncomp * 3 * p^2
  };
  std::vector<Level> levels;  // size cfg.max_level

  int scaling_block_size() const { return ncomp * p * p; }
  int detail_block_size() const { return ncomp * 3 * p * p; }

  const double* level0_block(int ix, int ixi) const {
    return level0.data() +
           static_cast<std::size_t>(ix * cfg.n0_xi + ixi) * scaling_block_size();
  }
  double* level0_block(int ix, int ixi) {
    return level0.data() +
           static_cast<std::size_t>(ix * cfg.n0_xi + ixi) * scaling_block_size();
  }
  // Detail/scaling block of a refined cell; nullptr when the cell carries none.
  const double* detail_block(const CellIndex& c) const;
  const double* scaling_block(const CellIndex& c) const;
  double* detail_block(const CellIndex& c);
  double* scaling_block(const CellIndex& c);

  // Euclidean norm of all stored coefficients (level-0 scaling + details).
  double coeff_norm() const;
};

// Bottom-up transform of the leaf data of `field` on its own tree.
MultiscaleState forward_transform(const LeafField& field, const Basis& basis);

// Top-down reconstruction onto the leaves of ms.tree.
LeafField inverse_transform(const MultiscaleState& ms, const Basis& basis);

// Reconstruction onto a refined target tree (target must contain ms.tree);
// cells without stored details reproduce their parent polynomial exactly.
LeafField inverse_transform(const MultiscaleState& ms, const Basis& basis,
                            const DetailTree& target);

// Local detail indicator: max |d| over components/entries, scaled by
// 1/sqrt(cell area) (per-cell normalized wavelets evaluated in sup norm).
double detail_norm(const double* detail_block, int ncomp, int p, double cell_area);
double detail_norm(const MultiscaleState& ms, const CellIndex& c);

struct ThresholdPolicy {
  ThresholdMode mode = ThresholdMode::uniform;
  double epsilon_max = 0.0;  // resolved global threshold scale
  double c_heuristic = 0.1;
  double beta = 1.0;
  const Distribution* density = nullptr;  // weighted mode only

  // epsilon_max = C * h_L^beta.
  static ThresholdPolicy uniform(const GridConfig& cfg, double c_heuristic = 0.1,
                                 double beta = 1.0);
  // epsilon_max = C * h_L^beta (the density acts per cell, in local_threshold).
  static ThresholdPolicy weighted(const GridConfig& cfg, const Distribution& density,
                                  double c_heuristic = 0.1, double beta = 1.0);
  // Direct epsilon_max (tests, special studies).
  static ThresholdPolicy fixed(ThresholdMode mode, double epsilon_max,
                               const Distribution* density = nullptr);
};

// Level- and (in weighted mode) cell-dependent threshold:
//   uniform : (h_L/h_l) * epsilon_max            = 2^(l-L) * epsilon_max
//   weighted: 2^(l-L) * epsilon_max / sup_{cell xi-extent} p_xi
// Cells with zero density mass get an infinite threshold.
double local_threshold(const ThresholdPolicy& policy, const GridConfig& cfg,
                       const CellIndex& c);

// Hard thresholding: keep cells with detail_norm > local_threshold, grade,
// drop all other detail blocks. Level-0 scaling blocks are never touched.
void threshold(MultiscaleState& ms, const ThresholdPolicy& policy);

// Harten prediction of the next-step significant tree: every currently
// significant cell marks its same-level x-neighbors; cells whose detail is
// at least 2^p times the child threshold mark their children (steepening).
// The result contains `tree` and is graded. No propagation in xi.
DetailTree predict(const DetailTree& tree, const MultiscaleState& ms,
                   const ThresholdPolicy& policy, BoundaryMode boundary);

}  // namespace mrdg
