#include "doctest.h"

#include "mrdg/moments.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "mrdg/transform.hpp"
#include "support.hpp"

using namespace mrdg;
using namespace testsup;

namespace {

GridConfig small_cfg(int n0x, int n0xi, int max_level) {
  GridConfig cfg;
  cfg.n0_x = n0x;
  cfg.n0_xi = n0xi;
  cfg.max_level = max_level;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("constant field: mean is the constant, variance vanishes") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 3);
  std::mt19937 rng(11);
  const DetailTree tree = random_tree(cfg, rng, 0.5);
  LeafField f = project_field(cfg, basis, {[](double, double) { return -2.75; }}, tree);

  // mass-1 densities reproduce the constant exactly
  for (const Distribution& d : {Distribution::uniform(0.0, 1.0),
                                Distribution::beta(2.0, 5.0),
                                Distribution::beta(2.0, 20.0)}) {
    MomentField mf = compute_moments(f, basis, d);
    CHECK(mf.x.size() == static_cast<std::size_t>(cfg.cells_x(cfg.max_level)));
    for (std::size_t i = 0; i < mf.x.size(); ++i) {
      CHECK(mf.mean[i] == doctest::Approx(-2.75).epsilon(1e-13));
      CHECK(std::abs(mf.variance[i]) < 1e-12);
      CHECK(mf.variance[i] > -1e-12);
    }
  }

  // the truncated (unrenormalized) normal scales the constant by its mass
  const Distribution nd = Distribution::normal(0.5, 0.15);
  const double mass = integrate1d([&](double t) { return nd.pdf(t); }, 0.0, 1.0, 40);
  MomentField mf = compute_moments(f, basis, nd);
  for (std::size_t i = 0; i < mf.x.size(); ++i) {
    CHECK(mf.mean[i] == doctest::Approx(-2.75 * mass).epsilon(1e-10));
    // Var = (c - c*mass)^2 * mass, tiny but nonzero by design
    CHECK(mf.variance[i] ==
          doctest::Approx(2.75 * 2.75 * (1.0 - mass) * (1.0 - mass) * mass).epsilon(1e-6));
  }
}

TEST_CASE("u(x,xi) = xi: classic first/second moments") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 4, 2);
  std::mt19937 rng(13);
  const DetailTree tree = random_tree(cfg, rng, 0.5);
  LeafField f = project_field(cfg, basis, {[](double, double xi) { return xi; }}, tree);

  SUBCASE("uniform(0,1): E = 1/2, Var = 1/12") {
    MomentField mf = compute_moments(f, basis, Distribution::uniform(0.0, 1.0));
    for (std::size_t i = 0; i < mf.x.size(); ++i) {
      CHECK(mf.mean[i] == doctest::Approx(0.5).epsilon(1e-13));
      CHECK(mf.variance[i] == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    }
  }
  SUBCASE("beta(2,5): E = 2/7, Var = 10/392") {
    MomentField mf = compute_moments(f, basis, Distribution::beta(2.0, 5.0));
    for (std::size_t i = 0; i < mf.x.size(); ++i) {
      CHECK(mf.mean[i] == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
      CHECK(mf.variance[i] == doctest::Approx(10.0 / 392.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("expectation is linear, variance is translation invariant") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 3);
  std::mt19937 rng(29);
  const DetailTree tree = random_tree(cfg, rng, 0.6);
  LeafField a = random_field(cfg, basis, 1, tree, rng);
  LeafField b = random_field(cfg, basis, 1, tree, rng);
  const Distribution d = Distribution::beta(2.0, 5.0);

  LeafField combo = a;
  for (std::size_t i = 0; i < combo.data.size(); ++i)
    combo.data[i] = 0.7 * a.data[i] - 1.3 * b.data[i];
  MomentField ma = compute_moments(a, basis, d);
  MomentField mb = compute_moments(b, basis, d);
  MomentField mc = compute_moments(combo, basis, d);
  for (std::size_t i = 0; i < mc.x.size(); ++i)
    CHECK(mc.mean[i] ==
          doctest::Approx(0.7 * ma.mean[i] - 1.3 * mb.mean[i]).epsilon(1e-12));

  // shift by a constant: project the constant 1 and add
  LeafField shifted = a;
  LeafField one = project_field(cfg, basis, {[](double, double) { return 1.0; }}, tree);
  for (std::size_t i = 0; i < shifted.data.size(); ++i)
    shifted.data[i] += 3.25 * one.data[i];
  MomentField ms = compute_moments(shifted, basis, d);
  for (std::size_t i = 0; i < ms.x.size(); ++i) {
    CHECK(ms.variance[i] == doctest::Approx(ma.variance[i]).epsilon(1e-11));
    CHECK(ms.mean[i] == doctest::Approx(ma.mean[i] + 3.25).epsilon(1e-12));
  }
}

TEST_CASE("adaptive-tree moments match an independent per-leaf oracle") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 3);
  std::mt19937 rng(37);
  const DetailTree tree = random_tree(cfg, rng, 0.6);
  auto fun = [](double x, double xi) {
    return std::sin(2.0 * x + 0.3) * (xi * xi - 0.4 * xi) + 0.5 * x;
  };
  LeafField f = project_field(cfg, basis, {fun}, tree);
  const Distribution d = Distribution::beta(2.0, 5.0);
  MomentField mf = compute_moments(f, basis, d);

  // oracle: at each column center walk the xi-leaves independently via
  // eval_point and high-order quadrature on each leaf's xi-extent
  const int L = cfg.max_level;
  for (int col = 0; col < cfg.cells_x(L); col += 3) {
    const double x = cfg.x_lo + (col + 0.5) * cfg.h_x(L);
    double want_mean = 0.0;
    double xi0 = 0.0;
    std::vector<std::pair<double, double>> segments;
    while (xi0 < 1.0 - 1e-14) {
      const int fxi = static_cast<int>(xi0 * cfg.cells_xi(L) + 0.5);
      const auto leaf = tree.leaf_covering({L, static_cast<int>(x / cfg.h_x(L)), fxi});
      REQUIRE(leaf.has_value());
      const Rect r = cell_geometry(cfg, *leaf);
      segments.emplace_back(r.xi0, r.xi1);
      xi0 = r.xi1;
    }
    for (auto [lo, hi] : segments)
      want_mean += integrate1d(
          [&](double xi) {
            double val;
            f.eval_point(basis, x, xi, &val);
            return val * d.pdf(xi);
          },
          lo, hi, 20);
    const int i = col;  // default sampling is one value per finest column
    CHECK(mf.mean[i] == doctest::Approx(want_mean).epsilon(1e-11));
    double want_var = 0.0;
    for (auto [lo, hi] : segments)
      want_var += integrate1d(
          [&](double xi) {
            double val;
            f.eval_point(basis, x, xi, &val);
            return (val - want_mean) * (val - want_mean) * d.pdf(xi);
          },
          lo, hi, 20);
    CHECK(mf.variance[i] == doctest::Approx(want_var).epsilon(1e-10));
  }
}

TEST_CASE("custom x samples and quantity maps") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 2);
  std::mt19937 rng(41);
  const DetailTree tree = random_tree(cfg, rng, 0.5);
  LeafField f = project_field(
      cfg, basis, {[](double x, double xi) { return x + xi * xi - 0.4 * xi; }}, tree);
  const Distribution d = Distribution::uniform(0.0, 1.0);

  SUBCASE("explicit x positions are honored") {
    const std::vector<double> xs{0.1, 0.5, 0.9};
    MomentField mf = compute_moments(f, basis, d, xs);
    REQUIRE(mf.x == xs);
    // against default sampling through the same machinery at a shared point
    MomentField all = compute_moments(f, basis, d);
    // the integrand is polynomial, so the mean at x=0.5 is exact:
    // E[0.5 + xi^2 - 0.4 xi] = 0.5 + 1/3 - 0.2
    CHECK(mf.mean[1] == doctest::Approx(0.5 + 1.0 / 3.0 - 0.2).epsilon(1e-13));
    CHECK(all.x.size() == static_cast<std::size_t>(cfg.cells_x(cfg.max_level)));
  }

  SUBCASE("x outside the domain throws") {
    CHECK_THROWS_AS(compute_moments(f, basis, d, {1.5}), ConfigError);
  }

  SUBCASE("quantity map: moments of u and u^2 simultaneously") {
    QuantityMap map = [](const double* s, double* out) {
      out[0] = s[0];
      out[1] = s[0] * s[0];
    };
    MomentField mf = compute_moments(f, basis, d, {}, 2, map);
    MomentField plain = compute_moments(f, basis, d);
    for (std::size_t i = 0; i < mf.x.size(); ++i) {
      CHECK(mf.mean_at(static_cast<int>(i), 0) ==
            doctest::Approx(plain.mean[i]).epsilon(1e-13));
      // Var[u] = E[u^2] - E[u]^2
      const double var_from_map = mf.mean_at(static_cast<int>(i), 1) -
                                  plain.mean[i] * plain.mean[i];
      CHECK(var_from_map == doctest::Approx(plain.variance[i]).epsilon(1e-11));
    }
  }

  SUBCASE("nquant without a map is rejected") {
    CHECK_THROWS_AS(compute_moments(f, basis, d, {}, 4, {}), ConfigError);
  }
}

TEST_CASE("moments CSV layout") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 1, 1);
  DetailTree tree(cfg);
  LeafField f = project_field(cfg, basis, {[](double, double xi) { return xi; }}, tree);
  MomentField mf = compute_moments(f, basis, Distribution::uniform(0.0, 1.0));
  std::ostringstream os;
  write_moments_csv(os, mf, 0);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,mean,variance,mean_minus_std,mean_plus_std");
  std::getline(is, line);
  // x=0.125, mean 0.5, var 1/12, band 0.5 -+ sqrt(1/12)
  CHECK(line.substr(0, 6) == "0.125,");
  int rows = 1;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == cfg.cells_x(cfg.max_level));
}

TEST_CASE("stability report: identical fields give zero left-hand sides") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 2);
  std::mt19937 rng(53);
  const DetailTree tree = random_tree(cfg, rng, 0.5);
  LeafField f = random_field(cfg, basis, 1, tree, rng);
  StabilityReport rep = moment_stability_check(f, f, basis, Distribution::beta(2.0, 5.0));
  CHECK(rep.pass());
  CHECK(rep.e_abs_diff_l1 == 0.0);
  CHECK(rep.e_diff_l1 == 0.0);
  for (const BoundPair& b : rep.bounds)
    if (b.name.find("stability") != std::string::npos ||
        b.name.find("difference") != std::string::npos)
      CHECK(b.lhs == 0.0);
}

TEST_CASE("stability inequalities hold on 100 random field pairs") {
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 2);
  std::mt19937 rng(59);
  const std::vector<Distribution> dists{
      Distribution::uniform(0.0, 1.0), Distribution::normal(0.5, 0.15),
      Distribution::beta(2.0, 5.0), Distribution::beta(2.0, 20.0)};
  int trials = 0;
  for (int t = 0; t < 25; ++t) {
    const DetailTree tree = random_tree(cfg, rng, 0.5);
    LeafField u = random_field(cfg, basis, 1, tree, rng);
    LeafField v = random_field(cfg, basis, 1, tree, rng);
    for (const Distribution& d : dists) {
      StabilityReport rep = moment_stability_check(u, v, basis, d);
      REQUIRE(rep.bounds.size() == 6);
      for (const BoundPair& b : rep.bounds) {
        INFO("trial " << t << " dist " << d.describe() << " bound " << b.name);
        CHECK(b.margin() >= -1e-10 * (1.0 + std::abs(b.rhs)));
      }
      ++trials;
    }
  }
  CHECK(trials == 100);
}

TEST_CASE("threshold perturbation: expectation error stays below the budget") {
  // unit-scale version of the expectation-error bound: |Omega|=1 grid, random
  // fields, weighted thresholds for each density; bound 27 * eps_max.
  const int p = 3;
  const Basis basis = build_basis(p);
  const GridConfig cfg = small_cfg(2, 2, 2);
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> mag(-5.0, 0.0);
  const std::vector<Distribution> dists{
      Distribution::uniform(0.0, 1.0), Distribution::normal(0.5, 0.15),
      Distribution::beta(2.0, 5.0), Distribution::beta(2.0, 20.0)};
  for (int t = 0; t < 10; ++t) {
    const DetailTree tree = random_tree(cfg, rng, 0.6);
    LeafField f = random_field(cfg, basis, 1, tree, rng);
    const double scale = std::pow(10.0, mag(rng));
    for (double& x : f.data) x *= scale;
    for (const Distribution& d : dists) {
      ThresholdPolicy pol = ThresholdPolicy::weighted(cfg, d);
      MultiscaleState ms = forward_transform(f, basis);
      threshold(ms, pol);
      LeafField back = inverse_transform(ms, basis, tree);
      StabilityReport rep = moment_stability_check(f, back, basis, d);
      INFO("trial " << t << " dist " << d.describe());
      CHECK(rep.e_diff_l1 <= 27.0 * pol.epsilon_max * (1.0 + 1e-12));
    }
  }
}
