#include "mrdg/grid.hpp"

#include <algorithm>
#include <cstdio>

namespace mrdg {

void GridConfig::validate() const {
  if (!(x_hi > x_lo) || !(xi_hi > xi_lo))
    throw ConfigError("grid: domain extents must be positive");
  if (n0_x < 1 || n0_xi < 1)
    throw ConfigError("grid: level-0 cell counts must be >= 1");
  if (max_level < 0 || max_level > 24)
    throw ConfigError("grid: max_level out of range [0,24]");
}

std::string cell_str(const CellIndex& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(level=%d, ix=%d, ixi=%d)", c.level, c.ix, c.ixi);
  return buf;
}

void check_cell(const GridConfig& cfg, const CellIndex& c) {
  if (c.level < 0 || c.level > cfg.max_level)
    throw ConfigError("grid: cell level out of range " + cell_str(c));
  if (c.ix < 0 || c.ix >= cfg.cells_x(c.level) || c.ixi < 0 ||
      c.ixi >= cfg.cells_xi(c.level))
    throw ConfigError("grid: cell index out of range " + cell_str(c));
}

std::array<CellIndex, 4> children(const GridConfig& cfg, const CellIndex& c) {
  check_cell(cfg, c);
  if (c.level >= cfg.max_level)
    throw ConfigError("grid: cannot refine a cell at the finest level " + cell_str(c));
  const int l = c.level + 1, jx = 2 * c.ix, jxi = 2 * c.ixi;
  return {CellIndex{l, jx, jxi}, CellIndex{l, jx + 1, jxi},
          CellIndex{l, jx, jxi + 1}, CellIndex{l, jx + 1, jxi + 1}};
}

CellIndex parent(const CellIndex& c) {
  if (c.level <= 0) throw ConfigError("grid: level-0 cell has no parent");
  return {c.level - 1, c.ix >> 1, c.ixi >> 1};
}

CellIndex ancestor_at(const CellIndex& c, int level) {
  if (level > c.level || level < 0)
    throw ConfigError("grid: ancestor level out of range " + cell_str(c));
  const int s = c.level - level;
  return {level, c.ix >> s, c.ixi >> s};
}

Rect cell_geometry(const GridConfig& cfg, const CellIndex& c) {
  check_cell(cfg, c);
  const double hx = cfg.h_x(c.level), hxi = cfg.h_xi(c.level);
  return {cfg.x_lo + c.ix * hx, cfg.x_lo + (c.ix + 1) * hx,
          cfg.xi_lo + c.ixi * hxi, cfg.xi_lo + (c.ixi + 1) * hxi};
}

std::vector<CellIndex> spatial_neighbors(const GridConfig& cfg, const CellIndex& c,
                                         BoundaryMode mode) {
  check_cell(cfg, c);
  const int nx = cfg.cells_x(c.level);
  std::vector<CellIndex> out;
  out.reserve(2);
  for (int d : {-1, +1}) {
    int jx = c.ix + d;
    if (mode == BoundaryMode::periodic) {
      jx = (jx + nx) % nx;
    } else if (jx < 0 || jx >= nx) {
      continue;
    }
    out.push_back(CellIndex{c.level, jx, c.ixi});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DetailTree::DetailTree(const GridConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  levels_.resize(static_cast<std::size_t>(std::max(cfg.max_level, 0)));
}

bool DetailTree::marked(const CellIndex& c) const {
  if (c.level < 0 || c.level >= static_cast<int>(levels_.size())) return false;
  return levels_[c.level].count(c.key()) != 0;
}

void DetailTree::mark(const CellIndex& c) {
  check_cell(cfg_, c);
  if (c.level >= cfg_.max_level)
    throw ConfigError("grid: cannot mark a finest-level cell as refined " + cell_str(c));
  levels_[c.level].insert(c.key());
}

void DetailTree::unmark(const CellIndex& c) {
  if (c.level >= 0 && c.level < static_cast<int>(levels_.size()))
    levels_[c.level].erase(c.key());
}

std::vector<CellIndex> DetailTree::marked_at(int level) const {
  std::vector<CellIndex> out;
  if (level < 0 || level >= static_cast<int>(levels_.size())) return out;
  out.reserve(levels_[level].size());
  for (std::uint64_t k : levels_[level]) {
    out.push_back(CellIndex{level, static_cast<int>((k >> 29) & 0x1fffffff),
                            static_cast<int>(k & 0x1fffffff)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t DetailTree::marked_count() const {
  std::size_t n = 0;
  for (const auto& s : levels_) n += s.size();
  return n;
}

int DetailTree::finest_marked_level() const {
  for (int l = static_cast<int>(levels_.size()) - 1; l >= 0; --l)
    if (!levels_[l].empty()) return l;
  return -1;
}

bool DetailTree::is_leaf(const CellIndex& c) const {
  if (marked(c)) return false;
  if (c.level == 0) return true;
  return marked(parent(c));
}

void DetailTree::leaves_under(const CellIndex& c, std::vector<CellIndex>& out) const {
  if (!marked(c)) {
    out.push_back(c);
    return;
  }
  for (const CellIndex& ch : children(cfg_, c)) leaves_under(ch, out);
}

std::vector<CellIndex> DetailTree::leaves() const {
  std::vector<CellIndex> out;
  for (int ix = 0; ix < cfg_.n0_x; ++ix)
    for (int ixi = 0; ixi < cfg_.n0_xi; ++ixi)
      leaves_under(CellIndex{0, ix, ixi}, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t DetailTree::leaf_count() const {
  // Each mark replaces one leaf by four children: 3 net new leaves.
  return static_cast<std::size_t>(cfg_.n0_x) * cfg_.n0_xi + 3 * marked_count();
}

std::optional<CellIndex> DetailTree::leaf_covering(const CellIndex& c) const {
  check_cell(cfg_, c);
  CellIndex cur{0, c.ix >> c.level, c.ixi >> c.level};
  while (cur.level < c.level) {
    if (!marked(cur)) return cur;
    const int s = c.level - cur.level - 1;
    cur = CellIndex{cur.level + 1, c.ix >> s, c.ixi >> s};
  }
  if (marked(cur)) return std::nullopt;  // subdivided finer than c
  return cur;
}

void DetailTree::grade() {
  for (int l = static_cast<int>(levels_.size()) - 1; l >= 1; --l)
    for (const CellIndex& c : marked_at(l)) levels_[l - 1].insert(parent(c).key());
}

bool DetailTree::is_graded() const {
  for (int l = 1; l < static_cast<int>(levels_.size()); ++l)
    for (const CellIndex& c : marked_at(l))
      if (!marked(parent(c))) return false;
  return true;
}

DetailTree full_tree(const GridConfig& cfg) {
  DetailTree t(cfg);
  for (int l = 0; l < cfg.max_level; ++l)
    for (int ix = 0; ix < cfg.cells_x(l); ++ix)
      for (int ixi = 0; ixi < cfg.cells_xi(l); ++ixi) t.mark(CellIndex{l, ix, ixi});
  return t;
}

void write_grid_csv(std::ostream& os, const DetailTree& tree) {
  os << "level,ix,ixi,x0,x1,xi0,xi1\n";
  char buf[160];
  for (const CellIndex& c : tree.leaves()) {
    const Rect r = cell_geometry(tree.config(), c);
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", c.level,
                  c.ix, c.ixi, r.x0, r.x1, r.xi0, r.xi1);
    os << buf;
  }
}

}  // namespace mrdg
