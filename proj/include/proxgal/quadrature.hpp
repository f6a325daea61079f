#pragma once
// Quadrature on the reference interval [0,1] and the reference triangle
// {(0,0),(1,0),(0,1)}. Rules are generated from Gauss recurrences, so any
// exactness degree up to 10 is available; exactness is tested against the
// closed-form monomial integrals.

#include <vector>

#include "proxgal/core.hpp"

namespace proxgal {

struct QuadratureRule {
  int dim = 1;
  int degree = 1;               // advertised exactness (total degree)
  std::vector<Pt> points;       // reference coordinates
  std::vector<double> weights;  // sum to the reference measure (1 or 1/2)
};

QuadratureRule quadrature_rule(int dim, int degree);

// Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int npoints, std::vector<double>& x, std::vector<double>& w);

}  // namespace proxgal
