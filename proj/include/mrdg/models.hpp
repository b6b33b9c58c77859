#pragma once

// Conservation-law models: Burgers and 1-D perfect-gas Euler, posed on the
// extended domain (x, xi) with physical flux in x only (the xi direction
// carries no flux). Also hosts the TVB minmod slope limiter shared by all
// models.

#include <functional>
#include <string>

#include "mrdg/grid.hpp"

namespace mrdg {

// A hyperbolic model. The flux / speed callbacks are batched: `state` holds
// n points laid out state[i*ncomp + c].
struct ModelSpec {
  std::string name;
  int ncomp = 1;
  double gamma = 0.0;  // ratio of specific heats; 0 for scalar models
  BoundaryMode boundary = BoundaryMode::periodic;
  double tvb_m = 0.0;  // TVB constant M of the minmod limiter

  // Physical x-flux at n points: flux[i*ncomp+c] = f_c(state_i).
  std::function<void(const double* state, int n, double* flux)> flux;
  // Max |wave speed| over n points.
  std::function<double(const double* state, int n)> max_speed;
  // Pointwise initial data u0(x, xi) -> state (ncomp values).
  std::function<void(double x, double xi, double* state)> initial;
  // True iff the state is physically admissible.
  std::function<bool(const double* state)> admissible;

  // Human-readable state string "(a, b, c)" for diagnostics.
  std::string format_state(const double* state) const;
};

// Burgers: f(u) = u^2/2, speed |u|, u0 = sin(2 pi x) sin(2 pi xi), periodic.
ModelSpec burgers_model();

// 1-D Euler with perfect-gas EOS, Sod-type data with uncertain left energy:
// (rho, rho v, rho E) = (1, 0, 0.5 + 2.5 xi) for x < 0.5 else (0.125, 0, 0.25)
// so the left pressure is xi + 0.2. Clamped boundaries (constant-extrapolation ghosts).
ModelSpec euler_model(double gamma = 1.4);

// Pressure of a conserved Euler state (may be <= 0 for bad states).
double euler_pressure(const double* state, double gamma);

// TVB minmod limiter for one cell's modal block (layout [comp][i1*p+i2],
// orthonormal tensor basis scaled by 1/sqrt(area)). Compares the linear
// x-moment of each component against forward/backward neighbor mean
// differences; if minmod alters it, every other moment of that component
// except the mean is zeroed. Cell means are never touched. `h` is the cell
// width in x (used by the TVB cutoff M*h^2). Returns true if anything
// changed.
bool shu_limit(double* block, int ncomp, int p, double area, double h,
               const double* mean_minus, const double* mean_plus, double tvb_m);

}  // namespace mrdg
