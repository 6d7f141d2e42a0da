#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace dgff {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
// Supported n: 8, 16, 32.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// Integrates f over [a, b] with one n-point Gauss-Legendre panel.
double integrate_panel(const std::function<double(double)>& f, double a,
                       double b, int n = 16);

// Composite rule over geometrically refined panels of [0, b]: panel edges
// b, b*r, b*r^2, ... down to b*r^depth, plus the stub [0, b*r^depth].
// Suited to integrands with exponential scales near 0.
double integrate_geometric(const std::function<double(double)>& f, double b,
                           double ratio, int depth, int n = 16);

}  // namespace dgff
