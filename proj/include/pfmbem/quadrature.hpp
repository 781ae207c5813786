#pragma once

#include <vector>

namespace pfmbem {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; tables for n <= 64 are built once.
const QuadratureRule& gauss_legendre(int n);

/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite rule with `panels` equal panels on [a, b].
QuadratureRule composite_gauss(int n, int panels, double a, double b);

/// Composite rule on [0, b] with panel edges b, b/2, b/4, ... down to a first
/// panel no wider than `smallest`.
QuadratureRule graded_gauss(int n, double b, double smallest);

}  // namespace pfmbem
