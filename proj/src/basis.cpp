#include "mrdg/basis.hpp"

#include <cmath>
#include <cstdio>

#include "mrdg/quadrature.hpp"

namespace mrdg {

double poly_eval(const Poly& a, double t) {
  double v = 0.0;
  for (std::size_t m = a.size(); m-- > 0;) v = v * t + a[m];
  return v;
}

Poly poly_derivative(const Poly& a) {
  if (a.size() <= 1) return {0.0};
  Poly d(a.size() - 1);
  for (std::size_t m = 1; m < a.size(); ++m) d[m - 1] = m * a[m];
  return d;
}

namespace {

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// Exact integral of a polynomial over [lo, hi].
double poly_integral(const Poly& a, double lo, double hi) {
  double v = 0.0;
  double plo = lo, phi = hi;
  for (std::size_t m = 0; m < a.size(); ++m) {
    v += a[m] * (phi - plo) / (m + 1.0);
    plo *= lo;
    phi *= hi;
  }
  return v;
}

// q(t) = a(s*t + c)
Poly poly_affine(const Poly& a, double s, double c) {
  Poly q{0.0};
  Poly lin{c, s};
  Poly pw{1.0};  // lin^m
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (q.size() < pw.size()) q.resize(pw.size(), 0.0);
    for (std::size_t j = 0; j < pw.size(); ++j) q[j] += a[m] * pw[j];
    pw = poly_mul(pw, lin);
  }
  return q;
}

void poly_axpy(Poly& y, double alpha, const Poly& x) {
  if (y.size() < x.size()) y.resize(x.size(), 0.0);
  for (std::size_t m = 0; m < x.size(); ++m) y[m] += alpha * x[m];
}

struct Piecewise {
  Poly left, right;  // on [0,1/2) and [1/2,1], global variable
};

Piecewise from_poly(const Poly& a) { return {a, a}; }

void pw_scale(Piecewise& y, double alpha) {
  for (double& v : y.left) v *= alpha;
  for (double& v : y.right) v *= alpha;
}

}  // namespace

ScalingBasis1D build_scaling_basis(int p) {
  if (p < 1 || p > 6) throw ConfigError("basis: p out of range [1,6]");
  ScalingBasis1D b;
  b.p = p;
  // Gram-Schmidt on monomials with exact integrals (repeated for stability).
  for (int j = 0; j < p; ++j) {
    Poly f(j + 1, 0.0);
    f[j] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k < j; ++k)
        poly_axpy(f, -poly_integral(poly_mul(f, b.phi[k]), 0.0, 1.0), b.phi[k]);
    const double nrm = std::sqrt(poly_integral(poly_mul(f, f), 0.0, 1.0));
    for (double& v : f) v /= nrm;
    // Shifted Legendre sign convention: phi_j(1) > 0.
    if (poly_eval(f, 1.0) < 0.0)
      for (double& v : f) v = -v;
    b.phi.push_back(f);
  }
  return b;
}

Wavelet1D build_wavelets(const ScalingBasis1D& scaling) {
  const int p = scaling.p;
  const int dim = 2 * p;
  Wavelet1D w;
  w.p = p;
  // Work in coordinates of the orthonormal fine basis e_{c,k} = sqrt(2)
  // phi_k(2t - c) on child c; dot products there keep the Gram-Schmidt at
  // machine precision. Both the seeds (degree < p per child) and the coarse
  // scaling functions lie exactly in this span.
  std::vector<Poly> fine(dim);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < p; ++k) {
      Poly e = poly_affine(scaling.phi[k], 2.0, -static_cast<double>(c));
      for (double& v : e) v *= std::sqrt(2.0);
      fine[c * p + k] = e;
    }
  // Coordinates via Gauss quadrature (exact for these degrees and free of the
  // coefficient cancellation a monomial-basis antiderivative would suffer).
  const QuadRule& quad = gauss_rule(p + 2);
  auto coords = [&](const Piecewise& f) {
    std::vector<double> v(dim);
    for (int c = 0; c < 2; ++c) {
      const Poly& piece = (c == 0) ? f.left : f.right;
      for (int k = 0; k < p; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < quad.x.size(); ++i) {
          const double t = 0.5 * (c + quad.x[i]);
          acc += quad.w[i] * poly_eval(piece, t) *
                 std::sqrt(2.0) * scaling.eval(k, quad.x[i]);
        }
        v[c * p + k] = 0.5 * acc;
      }
    }
    return v;
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  };
  std::vector<std::vector<double>> ortho;  // rows to orthogonalize against
  for (int j = 0; j < p; ++j) ortho.push_back(coords(from_poly(scaling.phi[j])));

  // Odd/even seed candidates: t^m on the right child, reflected about 1/2
  // with sign -1 (odd) or +1 (even) on the left child. Greedy Gram-Schmidt
  // keeps the first p seeds with a nondegenerate residual (e.g. the even
  // extension of t^0 is a global polynomial and is dropped).
  int nw = 0;
  for (int m = 0; m < p && nw < p; ++m) {
    for (double sgn : {-1.0, 1.0}) {
      if (nw >= p) break;
      Poly right(m + 1, 0.0);
      right[m] = 1.0;
      Poly left = poly_affine(right, -1.0, 1.0);  // right(1 - t)
      for (double& v : left) v *= sgn;
      std::vector<double> v = coords(Piecewise{left, right});
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : ortho) {
          const double c = dot(v, b);
          for (int i = 0; i < dim; ++i) v[i] -= c * b[i];
        }
      const double nrm = std::sqrt(dot(v, v));
      if (!(nrm > 1e-10)) continue;  // seed lies in the span already covered
      for (double& x : v) x /= nrm;
      // Map back to a piecewise polynomial in the global variable.
      Piecewise f{Poly{0.0}, Poly{0.0}};
      for (int k = 0; k < p; ++k) {
        poly_axpy(f.left, v[k], fine[k]);
        poly_axpy(f.right, v[p + k], fine[p + k]);
      }
      // Sign convention: leading coefficient of the right-child piece positive.
      double lead = 0.0;
      for (std::size_t q = f.right.size(); q-- > 0;)
        if (std::abs(f.right[q]) > 1e-12) {
          lead = f.right[q];
          break;
        }
      if (lead < 0.0) {
        pw_scale(f, -1.0);
        for (double& x : v) x = -x;
      }
      ortho.push_back(v);
      w.left.push_back(f.left);
      w.right.push_back(f.right);
      ++nw;
    }
  }
  if (nw != p)
    throw ConfigError("basis: wavelet construction failed to span the complement");
  return w;
}

TwoScaleMasks build_masks(const ScalingBasis1D& scaling, const Wavelet1D& wavelet) {
  const int p = scaling.p;
  if (wavelet.p != p) throw ConfigError("basis: mismatched p in mask build");
  auto check = [](double got, double want, const char* what) {
    if (std::abs(got - want) > 1e-12)
      throw ConfigError(std::string("basis: non-orthonormal input to mask build: ") + what);
  };
  // All integrals by per-child Gauss quadrature: exact for these polynomial
  // degrees and free of monomial-coefficient cancellation.
  const QuadRule& quad = gauss_rule(2 * p + 2);
  const int nq = static_cast<int>(quad.x.size());
  // fn[j](t): j < p scaling, j >= p wavelet, tabulated per child at the nodes.
  std::vector<double> tab(static_cast<std::size_t>(2 * p) * 2 * nq);
  auto at = [&](int j, int c, int i) -> double& { return tab[(j * 2 + c) * nq + i]; };
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < nq; ++i) {
      const double t = 0.5 * (c + quad.x[i]);
      for (int j = 0; j < p; ++j) {
        at(j, c, i) = scaling.eval(j, t);
        at(p + j, c, i) = poly_eval(c == 0 ? wavelet.left[j] : wavelet.right[j], t);
      }
    }
  // Validate orthonormality of the inputs.
  for (int a = 0; a < 2 * p; ++a)
    for (int b = a; b < 2 * p; ++b) {
      double dot = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < nq; ++i) dot += 0.5 * quad.w[i] * at(a, c, i) * at(b, c, i);
      check(dot, a == b ? 1.0 : 0.0, "gram");
    }

  TwoScaleMasks m;
  m.p = p;
  m.t.assign(4 * p * p, 0.0);
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < p; ++k)
      for (int j = 0; j < 2 * p; ++j) {
        // Child basis function on child c, normalized: sqrt(2) phi_k(2t - c);
        // at t = (c + s)/2 its argument is s, the reference node.
        double acc = 0.0;
        for (int i = 0; i < nq; ++i)
          acc += 0.5 * quad.w[i] * at(j, c, i) *
                 std::sqrt(2.0) * scaling.eval(k, quad.x[i]);
        m.t[j * 2 * p + c * p + k] = acc;
      }
  // The combined matrix must be orthogonal.
  for (int r = 0; r < 2 * p; ++r)
    for (int s = r; s < 2 * p; ++s) {
      double dot = 0.0;
      for (int c = 0; c < 2 * p; ++c) dot += m.at(r, c) * m.at(s, c);
      check(dot, r == s ? 1.0 : 0.0, "two-scale matrix");
    }
  return m;
}

Basis build_basis(int p) {
  Basis b;
  b.p = p;
  b.scaling = build_scaling_basis(p);
  b.wavelet = build_wavelets(b.scaling);
  b.masks = build_masks(b.scaling, b.wavelet);
  return b;
}

void evaluate_block(const Basis& basis, const double* block, int ncomp,
                    const Rect& cell, double x, double xi, double* out) {
  const double hx = cell.x1 - cell.x0, hxi = cell.xi1 - cell.xi0;
  const double tx = (x - cell.x0) / hx, txi = (xi - cell.xi0) / hxi;
  const double slack = 1e-12;
  if (tx < -slack || tx > 1.0 + slack || txi < -slack || txi > 1.0 + slack)
    throw ConfigError("basis: evaluation point outside cell");
  const int p = basis.p;
  const double inv_sqrt_area = 1.0 / std::sqrt(hx * hxi);
  double vx[8], vxi[8];
  for (int j = 0; j < p; ++j) {
    vx[j] = basis.scaling.eval(j, tx);
    vxi[j] = basis.scaling.eval(j, txi);
  }
  for (int c = 0; c < ncomp; ++c) {
    double acc = 0.0;
    const double* b = block + c * p * p;
    for (int i1 = 0; i1 < p; ++i1)
      for (int i2 = 0; i2 < p; ++i2) acc += b[i1 * p + i2] * vx[i1] * vxi[i2];
    out[c] = acc * inv_sqrt_area;
  }
}

void write_masks_csv(std::ostream& os, const TwoScaleMasks& masks) {
  os << "block,child,row,col,value\n";
  char buf[96];
  const int p = masks.p;
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) {
        std::snprintf(buf, sizeof buf, "H,%d,%d,%d,%.17g\n", c, j, k, masks.h(c, j, k));
        os << buf;
      }
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) {
        std::snprintf(buf, sizeof buf, "G,%d,%d,%d,%.17g\n", c, j, k, masks.g(c, j, k));
        os << buf;
      }
}

}  // namespace mrdg
