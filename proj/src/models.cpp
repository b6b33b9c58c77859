#include "mrdg/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mrdg {

std::string ModelSpec::format_state(const double* state) const {
  std::string out = "(";
  char buf[64];
  for (int c = 0; c < ncomp; ++c) {
    std::snprintf(buf, sizeof buf, "%s%.9g", c ? ", " : "", state[c]);
    out += buf;
  }
  return out + ")";
}

ModelSpec burgers_model() {
  ModelSpec m;
  m.name = "burgers";
  m.ncomp = 1;
  m.boundary = BoundaryMode::periodic;
  m.flux = [](const double* s, int n, double* f) {
    for (int i = 0; i < n; ++i) f[i] = 0.5 * s[i] * s[i];
  };
  m.max_speed = [](const double* s, int n) {
    double a = 0.0;
    for (int i = 0; i < n; ++i) a = std::max(a, std::abs(s[i]));
    return a;
  };
  m.initial = [](double x, double xi, double* s) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    s[0] = std::sin(two_pi * x) * std::sin(two_pi * xi);
  };
  m.admissible = [](const double* s) { return std::isfinite(s[0]); };
  return m;
}

double euler_pressure(const double* s, double gamma) {
  return (gamma - 1.0) * (s[2] - 0.5 * s[1] * s[1] / s[0]);
}

ModelSpec euler_model(double gamma) {
  ModelSpec m;
  m.name = "euler";
  m.ncomp = 3;
  m.gamma = gamma;
  m.boundary = BoundaryMode::clamped;
  m.flux = [gamma](const double* s, int n, double* f) {
    for (int i = 0; i < n; ++i) {
      const double rho = s[3 * i], mom = s[3 * i + 1], ene = s[3 * i + 2];
      const double v = mom / rho;
      const double p = (gamma - 1.0) * (ene - 0.5 * mom * v);
      f[3 * i] = mom;
      f[3 * i + 1] = mom * v + p;
      f[3 * i + 2] = v * (ene + p);
    }
  };
  m.max_speed = [gamma](const double* s, int n) {
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
      const double rho = s[3 * i], mom = s[3 * i + 1], ene = s[3 * i + 2];
      const double v = mom / rho;
      const double p = (gamma - 1.0) * (ene - 0.5 * mom * v);
      a = std::max(a, std::abs(v) + std::sqrt(gamma * p / rho));
    }
    return a;
  };
  m.initial = [](double x, double xi, double* s) {
    if (x < 0.5) {
      s[0] = 1.0;
      s[1] = 0.0;
      s[2] = 0.5 + 2.5 * xi;  // left pressure (gamma-1)*rhoE = xi + 0.2
    } else {
      s[0] = 0.125;
      s[1] = 0.0;
      s[2] = 0.25;
    }
  };
  m.admissible = [gamma](const double* s) {
    return std::isfinite(s[0]) && std::isfinite(s[1]) && std::isfinite(s[2]) &&
           s[0] > 0.0 && euler_pressure(s, gamma) > 0.0;
  };
  return m;
}

namespace {

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

}  // namespace

bool shu_limit(double* block, int ncomp, int p, double area, double h,
               const double* mean_minus, const double* mean_plus,
               double tvb_m) {
  if (p < 2) return false;  // no linear moment to limit
  const int pp = p * p;
  const double sqa = std::sqrt(area);
  const double sqrt3 = 1.7320508075688772935274463415059;
  bool changed = false;
  for (int c = 0; c < ncomp; ++c) {
    double* b = block + c * pp;
    const double mean = b[0] / sqa;
    const double sigma = sqrt3 * b[p] / sqa;  // face deviation of the x-slope
    if (std::abs(sigma) <= tvb_m * h * h) continue;
    const double lim =
        minmod(sigma, mean_plus[c] - mean, mean - mean_minus[c]);
    if (lim == sigma) continue;
    // Roundoff guard: a slope this small is indistinguishable from zero and
    // must not trigger the destructive higher-moment reset.
    if (std::abs(lim - sigma) <= 1e-14 * (1.0 + std::abs(mean))) continue;
    for (int k = 1; k < pp; ++k) b[k] = 0.0;
    b[p] = lim * sqa / sqrt3;
    changed = true;
  }
  return changed;
}

}  // namespace mrdg
