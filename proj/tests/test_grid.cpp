#include <random>
#include <sstream>

#include "doctest.h"
#include "mrdg/grid.hpp"

using namespace mrdg;

namespace {

GridConfig unit_cfg(int n0x, int n0xi, int L) {
  GridConfig cfg;
  cfg.n0_x = n0x;
  cfg.n0_xi = n0xi;
  cfg.max_level = L;
  cfg.validate();
  return cfg;
}

// Random graded tree built top-down (graded by construction).
DetailTree random_tree(const GridConfig& cfg, std::mt19937& rng, double pr0 = 0.6,
                       double decay = 0.75) {
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

}  // namespace

TEST_CASE("children: dyadic refinement, x-fastest order") {
  const GridConfig cfg = unit_cfg(1, 1, 3);
  const auto ch0 = children(cfg, {1, 0, 0});
  CHECK(ch0[0] == CellIndex{2, 0, 0});
  CHECK(ch0[1] == CellIndex{2, 1, 0});
  CHECK(ch0[2] == CellIndex{2, 0, 1});
  CHECK(ch0[3] == CellIndex{2, 1, 1});

  const auto ch = children(cfg, {2, 3, 1});
  CHECK(ch[0] == CellIndex{3, 6, 2});
  CHECK(ch[1] == CellIndex{3, 7, 2});
  CHECK(ch[2] == CellIndex{3, 6, 3});
  CHECK(ch[3] == CellIndex{3, 7, 3});

  for (const CellIndex& c : ch) CHECK(parent(c) == CellIndex{2, 3, 1});

  CHECK_THROWS_AS(children(cfg, {3, 0, 0}), ConfigError);
  CHECK_THROWS_AS(parent(CellIndex{0, 0, 0}), ConfigError);
  CHECK_THROWS_AS(children(cfg, {1, 5, 0}), ConfigError);
}

TEST_CASE("cell_geometry: anisotropic coarse grid, dyadic widths") {
  const GridConfig cfg = unit_cfg(8, 16, 6);
  CHECK(cfg.h_x(6) == doctest::Approx(1.0 / 512).epsilon(1e-15));
  CHECK(cfg.h_xi(6) == doctest::Approx(1.0 / 1024).epsilon(1e-15));
  const Rect r = cell_geometry(cfg, {6, 511, 1023});
  CHECK(r.x0 == doctest::Approx(511.0 / 512).epsilon(1e-15));
  CHECK(r.x1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.xi0 == doctest::Approx(1023.0 / 1024).epsilon(1e-15));
  CHECK(r.xi1 == doctest::Approx(1.0).epsilon(1e-15));

  const Rect r0 = cell_geometry(cfg, {0, 0, 0});
  CHECK(r0.x1 - r0.x0 == doctest::Approx(1.0 / 8).epsilon(1e-15));
  CHECK(r0.xi1 - r0.xi0 == doctest::Approx(1.0 / 16).epsilon(1e-15));
}

TEST_CASE("spatial_neighbors: x direction only, periodic wrap and clamping") {
  const GridConfig cfg = unit_cfg(1, 1, 3);
  const auto nb = spatial_neighbors(cfg, {2, 0, 1}, BoundaryMode::periodic);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0] == CellIndex{2, 1, 1});
  CHECK(nb[1] == CellIndex{2, 3, 1});

  const auto nc = spatial_neighbors(cfg, {2, 0, 1}, BoundaryMode::clamped);
  REQUIRE(nc.size() == 1);
  CHECK(nc[0] == CellIndex{2, 1, 1});

  const auto ni = spatial_neighbors(cfg, {2, 2, 3}, BoundaryMode::clamped);
  REQUIRE(ni.size() == 2);
  CHECK(ni[0] == CellIndex{2, 1, 3});
  CHECK(ni[1] == CellIndex{2, 3, 3});

  // Never any xi-direction neighbor.
  for (const auto& n : ni) CHECK(n.ixi == 3);
}

TEST_CASE("grade: ancestor closure, idempotent, monotone") {
  const GridConfig cfg = unit_cfg(1, 1, 3);
  DetailTree t(cfg);
  t.mark({2, 3, 1});
  CHECK_FALSE(t.is_graded());
  t.grade();
  CHECK(t.marked({2, 3, 1}));
  CHECK(t.marked({1, 1, 0}));
  CHECK(t.marked({0, 0, 0}));
  CHECK(t.marked_count() == 3);
  CHECK(t.is_graded());

  DetailTree t2 = t;
  t2.grade();
  CHECK(t2 == t);  // idempotent

  // Monotone: grading a superset yields a superset.
  DetailTree t3 = t;
  t3.mark({2, 0, 0});
  t3.grade();
  for (int l = 0; l < 3; ++l)
    for (const CellIndex& c : t.marked_at(l)) CHECK(t3.marked(c));
}

TEST_CASE("leaves partition the domain on random graded trees") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 20; ++trial) {
    GridConfig cfg = unit_cfg(1 + trial % 3, 1 + trial % 2, 4);
    DetailTree t = random_tree(cfg, rng);
    const auto lv = t.leaves();
    CHECK(lv.size() == t.leaf_count());
    double area = 0.0;
    for (const CellIndex& c : lv) area += cell_geometry(cfg, c).area();
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
    // Every finest-level cell is covered by exactly one leaf.
    std::uniform_int_distribution<int> dx(0, cfg.cells_x(4) - 1), dxi(0, cfg.cells_xi(4) - 1);
    for (int s = 0; s < 50; ++s) {
      const CellIndex probe{4, dx(rng), dxi(rng)};
      auto cov = t.leaf_covering(probe);
      REQUIRE(cov.has_value());
      CHECK(t.is_leaf(*cov));
      CHECK(ancestor_at(probe, cov->level) == *cov);
    }
  }
}

TEST_CASE("leaf_covering distinguishes coarser leaf from finer subdivision") {
  const GridConfig cfg = unit_cfg(1, 1, 3);
  DetailTree t(cfg);
  t.mark({0, 0, 0});
  t.mark({1, 1, 1});
  t.grade();
  // (1,0,0) is a leaf; probing its descendant returns it.
  auto cov = t.leaf_covering({2, 1, 1});
  REQUIRE(cov.has_value());
  CHECK(*cov == CellIndex{1, 0, 0});
  // (1,1,1) is refined: probing it reports finer subdivision.
  CHECK_FALSE(t.leaf_covering({1, 1, 1}).has_value());
  // Its children are leaves.
  CHECK(t.leaf_covering({2, 2, 2}) == CellIndex{2, 2, 2});
}

TEST_CASE("leaves_under collects the tile of a refined cell") {
  const GridConfig cfg = unit_cfg(1, 1, 2);
  DetailTree t(cfg);
  t.mark({0, 0, 0});
  t.mark({1, 0, 0});
  t.grade();
  std::vector<CellIndex> got;
  t.leaves_under({0, 0, 0}, got);
  CHECK(got.size() == 7);  // 4 grandchildren + 3 children
  double area = 0.0;
  for (const CellIndex& c : got) area += cell_geometry(cfg, c).area();
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("grid csv dump: schema and ordering") {
  const GridConfig cfg = unit_cfg(2, 1, 1);
  DetailTree t(cfg);
  t.mark({0, 1, 0});
  std::ostringstream os;
  write_grid_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "level,ix,ixi,x0,x1,xi0,xi1");
  std::getline(is, line);
  CHECK(line == "0,0,0,0,0.5,0,1");
  std::getline(is, line);
  CHECK(line == "1,2,0,0.5,0.75,0,0.5");
  // 5 leaves total: 1 level-0 + 4 children.
  int rows = 2;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("config validation") {
  GridConfig bad;
  bad.n0_x = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  GridConfig bad2;
  bad2.x_hi = bad2.x_lo;
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
}
