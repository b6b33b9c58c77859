#include "mrdg/transform.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <utility>

namespace mrdg {

namespace {

constexpr int kMaxP = 4;

// 2-D forward mask application for one component:
// four child scaling blocks -> parent scaling block + 3 detail sub-blocks.
void forward_cell_comp(const TwoScaleMasks& m, int p, const double* child[4],
                       double* scaling, double* detail) {
  double A[2 * kMaxP][2][kMaxP];
  double O[2 * kMaxP][2 * kMaxP];
  for (int r = 0; r < 2 * p; ++r)
    for (int cxi = 0; cxi < 2; ++cxi)
      for (int k2 = 0; k2 < p; ++k2) {
        double acc = 0.0;
        for (int cx = 0; cx < 2; ++cx)
          for (int k1 = 0; k1 < p; ++k1)
            acc += m.at(r, cx * p + k1) * child[cx + 2 * cxi][k1 * p + k2];
        A[r][cxi][k2] = acc;
      }
  for (int r1 = 0; r1 < 2 * p; ++r1)
    for (int r2 = 0; r2 < 2 * p; ++r2) {
      double acc = 0.0;
      for (int cxi = 0; cxi < 2; ++cxi)
        for (int k2 = 0; k2 < p; ++k2) acc += m.at(r2, cxi * p + k2) * A[r1][cxi][k2];
      O[r1][r2] = acc;
    }
  const int pp = p * p;
  for (int j1 = 0; j1 < p; ++j1)
    for (int j2 = 0; j2 < p; ++j2) {
      scaling[j1 * p + j2] = O[j1][j2];
      detail[0 * pp + j1 * p + j2] = O[p + j1][j2];      // wavelet in x
      detail[1 * pp + j1 * p + j2] = O[j1][p + j2];      // wavelet in xi
      detail[2 * pp + j1 * p + j2] = O[p + j1][p + j2];  // wavelet in both
    }
}

// Inverse of the above.
void inverse_cell_comp(const TwoScaleMasks& m, int p, const double* scaling,
                       const double* detail, double* child[4]) {
  double O[2 * kMaxP][2 * kMaxP];
  double B[2 * kMaxP][2][kMaxP];
  const int pp = p * p;
  for (int j1 = 0; j1 < p; ++j1)
    for (int j2 = 0; j2 < p; ++j2) {
      O[j1][j2] = scaling[j1 * p + j2];
      O[p + j1][j2] = detail ? detail[0 * pp + j1 * p + j2] : 0.0;
      O[j1][p + j2] = detail ? detail[1 * pp + j1 * p + j2] : 0.0;
      O[p + j1][p + j2] = detail ? detail[2 * pp + j1 * p + j2] : 0.0;
    }
  for (int r1 = 0; r1 < 2 * p; ++r1)
    for (int cxi = 0; cxi < 2; ++cxi)
      for (int k2 = 0; k2 < p; ++k2) {
        double acc = 0.0;
        for (int r2 = 0; r2 < 2 * p; ++r2) acc += m.at(r2, cxi * p + k2) * O[r1][r2];
        B[r1][cxi][k2] = acc;
      }
  for (int cx = 0; cx < 2; ++cx)
    for (int cxi = 0; cxi < 2; ++cxi)
      for (int k1 = 0; k1 < p; ++k1)
        for (int k2 = 0; k2 < p; ++k2) {
          double acc = 0.0;
          for (int r1 = 0; r1 < 2 * p; ++r1) acc += m.at(r1, cx * p + k1) * B[r1][cxi][k2];
          child[cx + 2 * cxi][k1 * p + k2] = acc;
        }
}

}  // namespace

MultiscaleState::MultiscaleState(const GridConfig& cfg_, int ncomp_, int p_,
                                 DetailTree tree_)
    : cfg(cfg_), ncomp(ncomp_), p(p_), tree(std::move(tree_)) {
  const int pp = p * p;
  level0.assign(static_cast<std::size_t>(cfg.n0_x) * cfg.n0_xi * ncomp * pp, 0.0);
  levels.resize(cfg.max_level);
  for (int l = 0; l < cfg.max_level; ++l) {
    Level& lv = levels[l];
    lv.cells = tree.marked_at(l);
    lv.slot.reserve(lv.cells.size() * 2);
    for (std::size_t i = 0; i < lv.cells.size(); ++i)
      lv.slot.emplace(lv.cells[i].key(), static_cast<int>(i));
    lv.scaling.assign(lv.cells.size() * static_cast<std::size_t>(ncomp) * pp, 0.0);
    lv.detail.assign(lv.cells.size() * static_cast<std::size_t>(ncomp) * 3 * pp, 0.0);
  }
}

const double* MultiscaleState::detail_block(const CellIndex& c) const {
  if (c.level < 0 || c.level >= static_cast<int>(levels.size())) return nullptr;
  const Level& lv = levels[c.level];
  auto it = lv.slot.find(c.key());
  if (it == lv.slot.end()) return nullptr;
  return lv.detail.data() + static_cast<std::size_t>(it->second) * detail_block_size();
}

const double* MultiscaleState::scaling_block(const CellIndex& c) const {
  if (c.level < 0 || c.level >= static_cast<int>(levels.size())) return nullptr;
  const Level& lv = levels[c.level];
  auto it = lv.slot.find(c.key());
  if (it == lv.slot.end()) return nullptr;
  return lv.scaling.data() + static_cast<std::size_t>(it->second) * scaling_block_size();
}

double* MultiscaleState::detail_block(const CellIndex& c) {
  return const_cast<double*>(std::as_const(*this).detail_block(c));
}

double* MultiscaleState::scaling_block(const CellIndex& c) {
  return const_cast<double*>(std::as_const(*this).scaling_block(c));
}

double MultiscaleState::coeff_norm() const {
  double acc = 0.0;
  for (double v : level0) acc += v * v;
  for (const Level& lv : levels)
    for (double v : lv.detail) acc += v * v;
  return std::sqrt(acc);
}

MultiscaleState forward_transform(const LeafField& field, const Basis& basis) {
  const GridConfig& cfg = field.cfg;
  const int p = field.p, ncomp = field.ncomp, pp = p * p;
  if (p > kMaxP) throw ConfigError("transform: p too large");
  MultiscaleState ms;
  ms.cfg = cfg;
  ms.ncomp = ncomp;
  ms.p = p;
  ms.tree = field.tree;
  ms.levels.resize(cfg.max_level);
  for (int l = cfg.max_level - 1; l >= 0; --l) {
    MultiscaleState::Level& lv = ms.levels[l];
    lv.cells = ms.tree.marked_at(l);
    lv.slot.reserve(lv.cells.size() * 2);
    for (std::size_t i = 0; i < lv.cells.size(); ++i)
      lv.slot.emplace(lv.cells[i].key(), static_cast<int>(i));
    lv.scaling.assign(lv.cells.size() * static_cast<std::size_t>(ncomp) * pp, 0.0);
    lv.detail.assign(lv.cells.size() * static_cast<std::size_t>(ncomp) * 3 * pp, 0.0);
    const MultiscaleState::Level* finer = l + 1 < cfg.max_level ? &ms.levels[l + 1] : nullptr;
    for (std::size_t i = 0; i < lv.cells.size(); ++i) {
      const auto ch = children(cfg, lv.cells[i]);
      const double* childbase[4];
      for (int k = 0; k < 4; ++k) {
        childbase[k] = nullptr;
        if (finer) {
          const auto it = finer->slot.find(ch[k].key());
          if (it != finer->slot.end())
            childbase[k] = finer->scaling.data() +
                           static_cast<std::size_t>(it->second) * ncomp * pp;
        }
        if (!childbase[k]) {
          const int fs = field.find(ch[k]);
          if (fs < 0)
            throw ConfigError("transform: tree/field mismatch at " + cell_str(ch[k]));
          childbase[k] = field.block(fs);
        }
      }
      double* sc = lv.scaling.data() + i * static_cast<std::size_t>(ncomp) * pp;
      double* de = lv.detail.data() + i * static_cast<std::size_t>(ncomp) * 3 * pp;
      for (int c = 0; c < ncomp; ++c) {
        const double* childc[4];
        for (int k = 0; k < 4; ++k) childc[k] = childbase[k] + c * pp;
        forward_cell_comp(basis.masks, p, childc, sc + c * pp, de + c * 3 * pp);
      }
    }
  }
  ms.level0.assign(static_cast<std::size_t>(cfg.n0_x) * cfg.n0_xi * ncomp * pp, 0.0);
  for (int ix = 0; ix < cfg.n0_x; ++ix)
    for (int ixi = 0; ixi < cfg.n0_xi; ++ixi) {
      const CellIndex c0{0, ix, ixi};
      const double* src = ms.tree.marked(c0) ? ms.scaling_block(c0)
                                             : field.block(field.find(c0));
      if (src == nullptr)
        throw ConfigError("transform: missing level-0 block at " + cell_str(c0));
      std::memcpy(ms.level0_block(ix, ixi), src,
                  sizeof(double) * static_cast<std::size_t>(ncomp) * pp);
    }
  return ms;
}

LeafField inverse_transform(const MultiscaleState& ms, const Basis& basis) {
  return inverse_transform(ms, basis, ms.tree);
}

LeafField inverse_transform(const MultiscaleState& ms, const Basis& basis,
                            const DetailTree& target) {
  const GridConfig& cfg = ms.cfg;
  const int p = ms.p, ncomp = ms.ncomp, pp = p * p;
  const int bs = ncomp * pp;
  // Every cell carrying a detail must stay refined in the target.
  for (const auto& lv : ms.levels)
    for (const CellIndex& c : lv.cells)
      if (!target.marked(c))
        throw ConfigError("transform: target tree does not contain ms tree at " +
                          cell_str(c));
  LeafField out = LeafField::make(cfg, ncomp, p, target);
  // Depth-first descent from the roots: marked cells are split into the
  // per-level child buffer, leaf blocks are written directly. No per-level
  // scratch maps are needed because each cell is visited exactly once.
  std::vector<std::vector<double>> childbuf(cfg.max_level,
                                            std::vector<double>(4 * static_cast<std::size_t>(bs)));
  auto descend = [&](auto&& self, const CellIndex& c, const double* sc) -> void {
    if (!target.marked(c)) {
      const int s = out.find(c);
      assert(s >= 0);
      std::memcpy(out.block(s), sc, sizeof(double) * bs);
      return;
    }
    const double* de = ms.detail_block(c);  // nullptr -> zero details
    double* base = childbuf[c.level].data();
    for (int comp = 0; comp < ncomp; ++comp) {
      double* childc[4];
      for (int k = 0; k < 4; ++k) childc[k] = base + k * bs + comp * pp;
      inverse_cell_comp(basis.masks, p, sc + comp * pp,
                        de ? de + comp * 3 * pp : nullptr, childc);
    }
    const auto ch = children(cfg, c);
    for (int k = 0; k < 4; ++k) self(self, ch[k], base + k * bs);
  };
  for (int ix = 0; ix < cfg.n0_x; ++ix)
    for (int ixi = 0; ixi < cfg.n0_xi; ++ixi)
      descend(descend, CellIndex{0, ix, ixi}, ms.level0_block(ix, ixi));
  return out;
}

double detail_norm(const double* detail_block, int ncomp, int p, double cell_area) {
  double mx = 0.0;
  const int n = ncomp * 3 * p * p;
  for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs(detail_block[i]));
  return mx / std::sqrt(cell_area);
}

double detail_norm(const MultiscaleState& ms, const CellIndex& c) {
  const double* d = ms.detail_block(c);
  if (d == nullptr) return 0.0;
  return detail_norm(d, ms.ncomp, ms.p, ms.cfg.cell_area(c.level));
}

ThresholdPolicy ThresholdPolicy::uniform(const GridConfig& cfg, double c_heuristic,
                                         double beta) {
  ThresholdPolicy pol;
  pol.mode = ThresholdMode::uniform;
  pol.c_heuristic = c_heuristic;
  pol.beta = beta;
  pol.epsilon_max = c_heuristic * std::pow(cfg.h(cfg.max_level), beta);
  return pol;
}

ThresholdPolicy ThresholdPolicy::weighted(const GridConfig& cfg,
                                          const Distribution& density,
                                          double c_heuristic, double beta) {
  ThresholdPolicy pol;
  pol.mode = ThresholdMode::weighted;
  pol.c_heuristic = c_heuristic;
  pol.beta = beta;
  pol.density = &density;
  const double sup = density.max_pdf();
  if (!(sup > 0.0)) throw ConfigError("threshold: density with zero sup on [0,1]");
  // Same global scale as the uniform policy; the density enters only through
  // the per-cell sup-norm division in local_threshold. Renormalizing the
  // global value by 1/sup as well would shrink every threshold near the
  // density mode, over-refining exactly where the grid is already resolved
  // and forfeiting the compression the weighting is meant to buy. The
  // moment-error sum over levels stays bounded by epsilon_max either way.
  pol.epsilon_max = c_heuristic * std::pow(cfg.h(cfg.max_level), beta);
  return pol;
}

ThresholdPolicy ThresholdPolicy::fixed(ThresholdMode mode, double epsilon_max,
                                       const Distribution* density) {
  ThresholdPolicy pol;
  pol.mode = mode;
  pol.epsilon_max = epsilon_max;
  pol.density = density;
  if (mode == ThresholdMode::weighted && density == nullptr)
    throw ConfigError("threshold: weighted mode needs a density");
  return pol;
}

double local_threshold(const ThresholdPolicy& policy, const GridConfig& cfg,
                       const CellIndex& c) {
  // h_L/h_l = 2^(l-L) exactly for the dyadic hierarchy.
  const double base = std::ldexp(policy.epsilon_max, c.level - cfg.max_level);
  if (policy.mode == ThresholdMode::uniform) return base;
  const Rect r = cell_geometry(cfg, c);
  const double sup = policy.density->cell_sup_norm(r.xi0, r.xi1);
  if (!(sup > 0.0)) return HUGE_VAL;  // zero-density cells are never significant
  return base / sup;
}

void threshold(MultiscaleState& ms, const ThresholdPolicy& policy) {
  DetailTree keep(ms.cfg);
  for (int l = 0; l < static_cast<int>(ms.levels.size()); ++l) {
    const MultiscaleState::Level& lv = ms.levels[l];
    for (std::size_t i = 0; i < lv.cells.size(); ++i) {
      const double* d =
          lv.detail.data() + i * static_cast<std::size_t>(ms.detail_block_size());
      const double nrm = detail_norm(d, ms.ncomp, ms.p, ms.cfg.cell_area(l));
      if (nrm > local_threshold(policy, ms.cfg, lv.cells[i])) keep.mark(lv.cells[i]);
    }
  }
  keep.grade();
  const int sbs = ms.scaling_block_size(), dbs = ms.detail_block_size();
  for (int l = 0; l < static_cast<int>(ms.levels.size()); ++l) {
    MultiscaleState::Level& lv = ms.levels[l];
    MultiscaleState::Level kept;
    kept.cells.reserve(lv.cells.size());
    for (std::size_t i = 0; i < lv.cells.size(); ++i) {
      if (!keep.marked(lv.cells[i])) continue;
      const int s = static_cast<int>(kept.cells.size());
      kept.cells.push_back(lv.cells[i]);
      kept.slot.emplace(lv.cells[i].key(), s);
      kept.scaling.insert(kept.scaling.end(), lv.scaling.begin() + i * sbs,
                          lv.scaling.begin() + (i + 1) * sbs);
      kept.detail.insert(kept.detail.end(), lv.detail.begin() + i * dbs,
                         lv.detail.begin() + (i + 1) * dbs);
    }
    lv = std::move(kept);
  }
  ms.tree = std::move(keep);
}

DetailTree predict(const DetailTree& tree, const MultiscaleState& ms,
                   const ThresholdPolicy& policy, BoundaryMode boundary) {
  const GridConfig& cfg = ms.cfg;
  DetailTree out = tree;
  for (int l = 0; l < static_cast<int>(ms.levels.size()); ++l) {
    const MultiscaleState::Level& lv = ms.levels[l];
    for (std::size_t i = 0; i < lv.cells.size(); ++i) {
      const CellIndex& c = lv.cells[i];
      const double* d =
          lv.detail.data() + i * static_cast<std::size_t>(ms.detail_block_size());
      const double nrm = detail_norm(d, ms.ncomp, ms.p, cfg.cell_area(l));
      if (!(nrm > local_threshold(policy, cfg, c))) continue;
      // (a) same-level spatial neighbors; never any xi propagation.
      for (const CellIndex& nb : spatial_neighbors(cfg, c, boundary)) out.mark(nb);
      // (b) steepening: strong details refine toward the children.
      if (l + 1 < cfg.max_level) {
        for (const CellIndex& ch : children(cfg, c)) {
          const double eps_child = local_threshold(policy, cfg, ch);
          if (nrm >= std::ldexp(eps_child, ms.p)) out.mark(ch);
        }
      }
    }
  }
  out.grade();
  return out;
}

}  // namespace mrdg
