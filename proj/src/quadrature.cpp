#include "dgff/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace dgff {

namespace {

// Newton iteration on the Legendre polynomial; classic Golub-Welsch-free
// construction, accurate to machine precision for the small n we use.
GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static const GaussRule r8 = make_rule(8);
  static const GaussRule r16 = make_rule(16);
  static const GaussRule r32 = make_rule(32);
  switch (n) {
    case 8:
      return r8;
    case 16:
      return r16;
    case 32:
      return r32;
    default:
      throw std::invalid_argument("gauss_legendre: unsupported order");
  }
}

double integrate_panel(const std::function<double(double)>& f, double a,
                       double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += r.weights[i] * f(mid + half * r.nodes[i]);
  return acc * half;
}

double integrate_geometric(const std::function<double(double)>& f, double b,
                           double ratio, int depth, int n) {
  if (!(b > 0.0) || !(ratio > 0.0 && ratio < 1.0) || depth < 1) {
    throw std::invalid_argument("integrate_geometric: bad panel layout");
  }
  double acc = 0.0;
  double hi = b;
  for (int i = 0; i < depth; ++i) {
    const double lo = hi * ratio;
    acc += integrate_panel(f, lo, hi, n);
    hi = lo;
  }
  acc += integrate_panel(f, 0.0, hi, n);
  return acc;
}

}  // namespace dgff
