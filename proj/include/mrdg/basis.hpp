#pragma once

// Orthonormal DG basis machinery on the reference interval [0,1]:
//  - ScalingBasis1D: L2-normalized shifted Legendre polynomials phi_0..phi_{p-1}
//  - Wavelet1D: Alpert-style multiwavelets psi_0..psi_{p-1} spanning the
//    orthogonal complement of the coarse space inside the two-child space,
//    with p vanishing moments each
//  - TwoScaleMasks: the orthogonal (2p)x(2p) change of basis between the two
//    children's scaling coefficients and (parent scaling, detail) coefficients
//
// Cell-local bases are the reference functions mapped affinely and normalized
// per cell, which makes the masks identical on every level.
//
// Tensorization for the 2-D (x, xi) cell: scaling index i = (i1,i2) stored
// row-major as i1*p+i2; detail functions carry a type e in {XW, WX_... } --
// see transform.hpp for the fixed ordering of the three detail types.

#include <ostream>
#include <vector>

#include "mrdg/errors.hpp"
#include "mrdg/grid.hpp"

namespace mrdg {

using Poly = std::vector<double>;  // monomial coefficients, poly[m] * t^m

double poly_eval(const Poly& a, double t);
Poly poly_derivative(const Poly& a);

struct ScalingBasis1D {
  int p = 0;
  std::vector<Poly> phi;  // phi[j], degree <= p-1, orthonormal on [0,1]

  double eval(int j, double t) const { return poly_eval(phi[j], t); }
  double deriv(int j, double t) const { return poly_eval(poly_derivative(phi[j]), t); }
};

struct Wavelet1D {
  int p = 0;
  // Piecewise polynomials in the global variable t on [0,1/2) and [1/2,1].
  std::vector<Poly> left, right;

  double eval(int j, double t) const {
    return t < 0.5 ? poly_eval(left[j], t) : poly_eval(right[j], t);
  }
};

struct TwoScaleMasks {
  int p = 0;
  // Orthogonal (2p)x(2p) matrix T. Row (e*p+j) with e=0 -> scaling output j,
  // e=1 -> wavelet output j. Column (c*p+k): child c in {0,1}, child basis k.
  std::vector<double> t;

  double at(int row, int col) const { return t[row * 2 * p + col]; }
  double h(int c, int j, int k) const { return at(j, c * p + k); }      // scaling mask
  double g(int c, int j, int k) const { return at(p + j, c * p + k); }  // wavelet mask
};

struct Basis {
  int p = 0;
  ScalingBasis1D scaling;
  Wavelet1D wavelet;
  TwoScaleMasks masks;
};

ScalingBasis1D build_scaling_basis(int p);
Wavelet1D build_wavelets(const ScalingBasis1D& scaling);
// Validates orthonormality of the inputs; throws ConfigError otherwise.
TwoScaleMasks build_masks(const ScalingBasis1D& scaling, const Wavelet1D& wavelet);
Basis build_basis(int p);

// Evaluate a per-cell coefficient block (layout [comp][i1*p+i2], the basis
// being phi_{i1}(x_hat) phi_{i2}(xi_hat) / sqrt(cell area)) at a physical
// point inside the cell. Throws ConfigError when the point lies outside.
void evaluate_block(const Basis& basis, const double* block, int ncomp,
                    const Rect& cell, double x, double xi, double* out);

// Debug dump: rows `block,child,row,col,value` with block in {H,G}.
void write_masks_csv(std::ostream& os, const TwoScaleMasks& masks);

}  // namespace mrdg
