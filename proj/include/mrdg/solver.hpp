#pragma once

// Adaptive multiresolution DG solver. Each time step: refine the grid by
// Harten prediction (forward transform, predict, reconstruct), advance with a
// 3-stage SSP-RK3 modal DG scheme (local Lax-Friedrichs flux in x, zero flux
// in xi, TVB minmod limiting on every stage), then coarsen by hard
// thresholding of the detail coefficients. Leaves whose refinement status
// does not change keep their coefficient blocks verbatim, so a run with
// epsilon_max = 0 on the uniform finest grid matches a plain RKDG run
// bit-for-bit.

#include <vector>

#include "mrdg/basis.hpp"
#include "mrdg/field.hpp"
#include "mrdg/models.hpp"
#include "mrdg/transform.hpp"

namespace mrdg {

struct SolverOptions {
  double cfl = 0.1;
  bool adaptive = true;  // false: fixed grid, no transforms (plain RKDG)
  int nthreads = 1;
  int nq = 0;  // quadrature points per direction in residuals; 0 -> p + 1
};

struct SolverState {
  LeafField field;
  double t = 0.0;
  long steps = 0;
  long long n_total = 0;              // cumulative evolution-grid leaf count
  std::vector<long> leaves_per_step;  // evolution-grid leaves, one per step
};

struct RunStats {
  long steps = 0;
  long long n_total = 0;
  double wall_seconds = 0.0;
};

// L2-projection of the model's initial data onto the leaves of `tree`
// (tensor Gauss quadrature, nq points per direction; 0 -> p + 2).
LeafField project_initial(const GridConfig& cfg, const Basis& basis,
                          const ModelSpec& model, const DetailTree& tree,
                          int nq = 0, int nthreads = 1);

// Finest-grid projection of the initial data followed by one threshold pass
// (the pass is skipped when opt.adaptive is false, keeping the full grid).
SolverState initialize(const GridConfig& cfg, const Basis& basis,
                       const ModelSpec& model, const ThresholdPolicy& policy,
                       const SolverOptions& opt = {});

// Local Lax-Friedrichs numerical flux F(ul, ur) (ncomp values).
void lax_friedrichs(const ModelSpec& model, const double* ul, const double* ur,
                    double* out);

// Modal time derivative of every leaf block: volume term plus x-face fluxes
// (hanging faces split over the finer side's sub-faces). Layout matches
// f.data. Throws AdmissibilityError when an evaluated state is unphysical.
std::vector<double> assemble_residual(const LeafField& f, const Basis& basis,
                                      const ModelSpec& model,
                                      const SolverOptions& opt = {});

// Largest wave speed over all leaves' volume quadrature points; also runs
// the admissibility scan.
double max_wave_speed(const LeafField& f, const Basis& basis,
                      const ModelSpec& model, const SolverOptions& opt = {});

// One step of the adaptive scheme toward t_end with
// dt = min(cfl * h_x(finest present level) / max wave speed, t_end - t).
// Returns the dt taken.
double step(SolverState& st, const Basis& basis, const ModelSpec& model,
            const ThresholdPolicy& policy, double t_end,
            const SolverOptions& opt = {});

// Steps until t reaches t_end (immediately returns when t >= t_end).
RunStats run(SolverState& st, const Basis& basis, const ModelSpec& model,
             const ThresholdPolicy& policy, double t_end,
             const SolverOptions& opt = {});

}  // namespace mrdg
