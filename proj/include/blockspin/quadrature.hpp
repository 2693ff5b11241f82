#pragma once

// One-dimensional Gauss-Legendre rules and order-fixed summation.

#include <complex>
#include <span>
#include <vector>

namespace blockspin {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule on [lo, hi]; exact for polynomials of degree <= 2n - 1.
QuadratureRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Pairwise (cascade) summation; the result does not depend on how callers
/// chunk the work, only on the element order.
double pairwise_sum(std::span<const double> values);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> values);

}  // namespace blockspin
