#pragma once

#include <vector>

namespace gvs {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with `count` nodes on [a, b]; nodes ascending.
QuadratureRule gauss_legendre(int count, double a = -1.0, double b = 1.0);

}  // namespace gvs
