#pragma once

// Gauss-Legendre quadrature on the reference interval [0,1].

#include <vector>

namespace mrdg {

struct QuadRule {
  std::vector<double> x;  // nodes in (0,1)
  std::vector<double> w;  // weights, sum to 1
};

// Cached n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
const QuadRule& gauss_rule(int n);

}  // namespace mrdg
