#pragma once

#include <vector>

namespace rlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the standard normal weight exp(-x^2/2)/sqrt(2*pi).
/// Weights sum to 1, so sum_i w_i f(x_i) approximates E[f(Z)], Z ~ N(0,1).
const QuadratureRule& gauss_hermite(int order);

/// Gauss-Legendre rule rescaled to [0,1]; weights sum to 1.
const QuadratureRule& gauss_legendre01(int order);

}  // namespace rlab
