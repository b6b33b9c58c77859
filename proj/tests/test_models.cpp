#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "mrdg/models.hpp"

using namespace mrdg;

namespace {

// Independent scalar minmod used as the limiter oracle.
double minmod_oracle(double a, double b, double c) {
  const int sa = (a > 0) - (a < 0), sb = (b > 0) - (b < 0),
            sc = (c > 0) - (c < 0);
  if (sa != sb || sb != sc || sa == 0) return 0.0;
  return sa * std::min(std::abs(a), std::min(std::abs(b), std::abs(c)));
}

// Builds a p=3 single-component block with prescribed mean and x-slope
// face deviation sigma, plus arbitrary higher moments.
std::vector<double> make_block(double mean, double sigma, double area) {
  std::vector<double> b(9, 0.0);
  b[0] = mean * std::sqrt(area);
  b[3] = sigma * std::sqrt(area) / std::sqrt(3.0);
  b[1] = 0.017;  // xi-slope
  b[4] = -0.4;   // mixed
  b[6] = 0.25;   // quadratic x
  return b;
}

}  // namespace

TEST_CASE("burgers flux and speed") {
  auto m = burgers_model();
  REQUIRE(m.ncomp == 1);
  CHECK(m.boundary == BoundaryMode::periodic);

  const double s[3] = {0.0, 2.0, -1.0};
  double f[3];
  m.flux(s, 3, f);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 2.0);
  CHECK(f[2] == 0.5);

  CHECK(m.max_speed(s, 1) == 0.0);
  CHECK(m.max_speed(s + 2, 1) == 1.0);
  CHECK(m.max_speed(s, 3) == 2.0);
  CHECK(m.admissible(s));
  const double bad = std::nan("");
  CHECK_FALSE(m.admissible(&bad));
}

TEST_CASE("burgers initial data") {
  auto m = burgers_model();
  double u;
  m.initial(0.25, 0.25, &u);
  CHECK(u == doctest::Approx(1.0).epsilon(1e-15));
  m.initial(0.5, 0.37, &u);
  CHECK(std::abs(u) < 1e-15);
  m.initial(0.25, 0.75, &u);
  CHECK(u == doctest::Approx(-1.0).epsilon(1e-15));
  // periodic in x
  m.initial(0.1, 0.6, &u);
  double u2;
  m.initial(1.1, 0.6, &u2);
  CHECK(u == doctest::Approx(u2).epsilon(1e-12));
}

TEST_CASE("euler flux, speed, pressure") {
  auto m = euler_model();
  REQUIRE(m.ncomp == 3);
  CHECK(m.gamma == 1.4);
  CHECK(m.boundary == BoundaryMode::clamped);

  SUBCASE("sod left state") {
    const double s[3] = {1.0, 0.0, 2.5};
    CHECK(euler_pressure(s, 1.4) == doctest::Approx(1.0).epsilon(1e-14));
    double f[3];
    m.flux(s, 1, f);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f[2] == 0.0);
    CHECK(m.max_speed(s, 1) == doctest::Approx(std::sqrt(1.4)).epsilon(1e-14));
    CHECK(m.max_speed(s, 1) == doctest::Approx(1.1832159566199232).epsilon(1e-12));
    CHECK(m.admissible(s));
  }

  SUBCASE("sod right state") {
    const double s[3] = {0.125, 0.0, 0.25};
    CHECK(euler_pressure(s, 1.4) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(m.max_speed(s, 1) ==
          doctest::Approx(std::sqrt(1.4 * 0.8)).epsilon(1e-14));
    CHECK(m.max_speed(s, 1) == doctest::Approx(1.0583005244258363).epsilon(1e-12));
  }

  SUBCASE("moving state, independent formula evaluation") {
    // rho=1, v=2, p=3: rhoE = p/(gamma-1) + rho v^2/2 = 7.5 + 2 = 9.5.
    const double s[3] = {1.0, 2.0, 9.5};
    CHECK(euler_pressure(s, 1.4) == doctest::Approx(3.0).epsilon(1e-14));
    double f[3];
    m.flux(s, 1, f);
    CHECK(f[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(7.0).epsilon(1e-14));   // rho v^2 + p
    CHECK(f[2] == doctest::Approx(25.0).epsilon(1e-14));  // v (rhoE + p)
    CHECK(m.max_speed(s, 1) ==
          doctest::Approx(2.0 + std::sqrt(4.2)).epsilon(1e-14));
  }

  SUBCASE("zero-velocity momentum flux equals pressure") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> ur(0.1, 4.0);
    for (int t = 0; t < 20; ++t) {
      const double rho = ur(rng), p = ur(rng);
      const double s[3] = {rho, 0.0, p / 0.4};
      double f[3];
      m.flux(s, 1, f);
      CHECK(f[0] == 0.0);
      CHECK(f[1] == doctest::Approx(p).epsilon(1e-13));
      CHECK(f[2] == 0.0);
    }
  }

  SUBCASE("batched evaluation matches pointwise") {
    const double s[6] = {1.0, 0.0, 2.5, 0.125, 0.0, 0.25};
    double f[6], f1[3];
    m.flux(s, 2, f);
    m.flux(s + 3, 1, f1);
    for (int c = 0; c < 3; ++c) CHECK(f[3 + c] == f1[c]);
    CHECK(m.max_speed(s, 2) == doctest::Approx(std::sqrt(1.4)).epsilon(1e-14));
  }
}

TEST_CASE("euler initial data and admissibility") {
  auto m = euler_model();
  double s[3];
  m.initial(0.25, 0.32, s);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(euler_pressure(s, 1.4) == doctest::Approx(0.52).epsilon(1e-14));

  m.initial(0.75, 0.9, s);
  CHECK(s[0] == 0.125);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.25);

  m.initial(0.1, 0.0, s);  // xi = 0: smallest left pressure
  CHECK(euler_pressure(s, 1.4) == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(m.admissible(s));

  const double neg_rho[3] = {-0.1, 0.0, 1.0};
  CHECK_FALSE(m.admissible(neg_rho));
  const double neg_p[3] = {1.0, 2.0, 1.0};  // p = 0.4*(1 - 2) < 0
  CHECK_FALSE(m.admissible(neg_p));
  const double nan_s[3] = {1.0, std::nan(""), 1.0};
  CHECK_FALSE(m.admissible(nan_s));
  CHECK(m.format_state(neg_p) == "(1, 2, 1)");
}

TEST_CASE("shu limiter") {
  const double area = 1.0 / 128.0, h = 1.0 / 16.0;
  const double sqa = std::sqrt(area);

  SUBCASE("constant cell unchanged") {
    std::vector<double> b(9, 0.0);
    b[0] = 3.77 * sqa;
    auto orig = b;
    const double mm[1] = {3.77}, mp[1] = {3.77};
    CHECK_FALSE(shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.0));
    CHECK(std::memcmp(b.data(), orig.data(), 9 * sizeof(double)) == 0);
  }

  SUBCASE("smooth linear data unchanged") {
    // global slope: sigma = s*h/2, neighbor mean jumps = s*h.
    auto b = make_block(1.0, 0.5, area);
    auto orig = b;
    const double mm[1] = {0.0}, mp[1] = {2.0};
    CHECK_FALSE(shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.0));
    CHECK(std::memcmp(b.data(), orig.data(), 9 * sizeof(double)) == 0);
  }

  SUBCASE("isolated extremum flattened") {
    auto b = make_block(2.0, 0.5, area);
    const double mm[1] = {2.4}, mp[1] = {1.7};  // both neighbors differ in sign
    CHECK(shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.0));
    CHECK(b[0] == 2.0 * sqa);  // mean bit-identical
    for (int k = 1; k < 9; ++k) CHECK(b[k] == 0.0);
  }

  SUBCASE("slope reduced to minmod of mean differences") {
    auto b = make_block(0.3, 0.9, area);
    const double mm[1] = {-0.4}, mp[1] = {0.7};  // deltas +0.4 (fwd), +0.7 (bwd)
    const double want = minmod_oracle(0.9, 0.7 - 0.3, 0.3 - (-0.4));
    CHECK(want == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.0));
    CHECK(b[3] == doctest::Approx(want * sqa / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(b[1] == 0.0);  // higher/mixed moments zeroed
    CHECK(b[4] == 0.0);
    CHECK(b[6] == 0.0);
  }

  SUBCASE("negative slope side") {
    auto b = make_block(0.0, -0.9, area);
    const double mm[1] = {0.25}, mp[1] = {-0.6};
    CHECK(shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.0));
    CHECK(b[3] == doctest::Approx(-0.25 * sqa / std::sqrt(3.0)).epsilon(1e-15));
  }

  SUBCASE("tvb cutoff skips small slopes") {
    auto b = make_block(2.0, 0.5, area);
    auto orig = b;
    const double mm[1] = {2.4}, mp[1] = {1.7};
    // M h^2 >= |sigma|: limiter must not engage despite the extremum.
    CHECK_FALSE(
        shu_limit(b.data(), 1, 3, area, h, mm, mp, 0.6 / (h * h)));
    CHECK(std::memcmp(b.data(), orig.data(), 9 * sizeof(double)) == 0);
  }

  SUBCASE("component-wise for systems") {
    std::vector<double> b(27, 0.0);
    // comp 0: consistent slope (untouched); comp 2: extremum (flattened)
    auto b0 = make_block(1.0, 0.5, area);
    auto b2 = make_block(5.0, 1.0, area);
    std::copy(b0.begin(), b0.end(), b.begin());
    std::copy(b2.begin(), b2.end(), b.begin() + 18);
    b[9] = -2.0 * sqa;  // comp 1 constant
    const double mm[3] = {0.0, -2.0, 5.5}, mp[3] = {2.0, -2.0, 4.2};
    CHECK(shu_limit(b.data(), 3, 3, area, h, mm, mp, 0.0));
    for (int k = 0; k < 9; ++k) CHECK(b[k] == b0[k]);  // comp 0 intact
    CHECK(b[9] == -2.0 * sqa);
    CHECK(b[18] == 5.0 * sqa);
    for (int k = 19; k < 27; ++k) CHECK(b[k] == 0.0);
  }

  SUBCASE("means always preserved, oracle agreement on random cells") {
    std::mt19937 rng(929);
    std::uniform_real_distribution<double> ur(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> b(18);
      for (auto& v : b) v = ur(rng);
      const double mm[2] = {ur(rng), ur(rng)}, mp[2] = {ur(rng), ur(rng)};
      std::vector<double> orig = b;
      shu_limit(b.data(), 2, 3, area, h, mm, mp, 0.0);
      for (int c = 0; c < 2; ++c) {
        CHECK(b[9 * c] == orig[9 * c]);  // mean coefficient bitwise
        const double mean = orig[9 * c] / sqa;
        const double sigma = std::sqrt(3.0) * orig[9 * c + 3] / sqa;
        const double want = minmod_oracle(sigma, mp[c] - mean, mean - mm[c]);
        const double got = std::sqrt(3.0) * b[9 * c + 3] / sqa;
        CHECK(got == doctest::Approx(want).epsilon(1e-13));
        if (want != sigma) {
          for (int k = 1; k < 9; ++k)
            if (k != 3) CHECK(b[9 * c + k] == 0.0);
        }
      }
    }
  }

  SUBCASE("p=1 blocks never limited") {
    double b[2] = {0.5, -0.5};
    const double mm[2] = {9.0, 9.0}, mp[2] = {-9.0, -9.0};
    CHECK_FALSE(shu_limit(b, 2, 1, area, h, mm, mp, 0.0));
    CHECK(b[0] == 0.5);
    CHECK(b[1] == -0.5);
  }
}
