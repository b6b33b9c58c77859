#pragma once

// Post-processing of stochastic moments from an adaptive leaf field: for a
// set of x positions, the xi-leaves covering the vertical line through x are
// integrated against the probability density with fixed-order Gauss
// quadrature, giving expectation and variance (plus std-dev bands).

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrdg/distribution.hpp"
#include "mrdg/field.hpp"

namespace mrdg {

// Pointwise map from the conserved state (ncomp values) to derived
// quantities (nquant values), e.g. appending velocity/pressure for Euler.
// An empty function means identity (nquant = ncomp).
using QuantityMap = std::function<void(const double* state, double* out)>;

struct MomentField {
  int nquant = 1;
  std::vector<double> x;         // sample positions
  std::vector<double> mean;      // x.size() * nquant, quantities fastest
  std::vector<double> variance;  // same layout

  double mean_at(int i, int q) const { return mean[static_cast<std::size_t>(i) * nquant + q]; }
  double variance_at(int i, int q) const {
    return variance[static_cast<std::size_t>(i) * nquant + q];
  }
};

// Centers of the finest-level x-columns.
std::vector<double> finest_column_centers(const GridConfig& cfg);

// Density-weighted moments at the given x positions (default: every finest
// x-column center). Two passes per column: expectation, then the centralized
// second moment E[(g(u) - E[g(u)])^2].
MomentField compute_moments(const LeafField& field, const Basis& basis,
                            const Distribution& dist,
                            const std::vector<double>& x_samples = {},
                            int nquant = 0, const QuantityMap& map = {});

// One quantity per file: header x,mean,variance,mean_minus_std,mean_plus_std.
void write_moments_csv(std::ostream& os, const MomentField& mf, int quant);

// Numeric both-sides checks of the expectation/moment stability estimates
// for a pair of scalar fields on the same tree (property tests only).
struct BoundPair {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

struct StabilityReport {
  std::vector<BoundPair> bounds;
  double m_sup = 0.0;          // M(u,v): max sup-norm estimate of the pair
  double e_abs_diff_l1 = 0.0;  // || E[|u-v|] ||_L1 in x
  double e_diff_l1 = 0.0;      // || E[u] - E[v] ||_L1 in x
  bool pass(double slack = 1e-10) const;
};

StabilityReport moment_stability_check(const LeafField& u, const LeafField& v,
                                       const Basis& basis, const Distribution& dist);

}  // namespace mrdg
