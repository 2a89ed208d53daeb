#pragma once

#include <functional>
#include <vector>

namespace potlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Chebyshev rule for the weight 1/(pi sqrt(1-x^2)) on [-1, 1]
/// (weights sum to 1).
QuadratureRule gauss_chebyshev(int n);

/// Integral of f over [a, b] allowing integrable endpoint singularities.
double integrate_singular(const std::function<double(double)>& f, double a, double b);

}  // namespace potlab
