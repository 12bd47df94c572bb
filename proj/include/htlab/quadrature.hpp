#pragma once

#include <cmath>
#include <cstdlib>

namespace htlab {

/// Tanh-sinh (double exponential) quadrature on a finite interval (a, b).
/// Robust against integrable endpoint singularities; f is never evaluated
/// at the endpoints themselves.
template <class F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-12,
                 int max_level = 14) {
  const double half = 0.5 * (b - a);
  const double t_max = 6.115;  // node weights underflow beyond this

  // Nodes are placed by their distance to the nearest endpoint, computed
  // through 1 -|tanh u| = 2 e^{-2|u|} / (1 + e^{-2|u|}); the naive
  // mid + half tanh(u) form cancels catastrophically near endpoint
  // singularities and stalls the convergence around 1e-8.
  auto term = [&](double t) -> double {
    const double u = 0.5 * M_PI * std::sinh(t);
    const double e2 = std::exp(-2.0 * std::abs(u));
    const double gap = 2.0 * e2 / (1.0 + e2);
    const double sech = 2.0 * std::exp(-std::abs(u)) / (1.0 + e2);
    const double w = half * 0.5 * M_PI * std::cosh(t) * sech * sech;
    if (w == 0.0 || !std::isfinite(w)) return 0.0;
    const double x = (u < 0.0) ? a + half * gap : b - half * gap;
    if (x <= a || x >= b) return 0.0;
    const double v = f(x) * w;
    return std::isfinite(v) ? v : 0.0;
  };

  double prev = 0.0;
  double result = 0.0;
  for (int level = 0; level <= max_level; ++level) {
    const double h = std::ldexp(1.0, -level);
    double fresh = 0.0;
    if (level == 0) {
      fresh += term(0.0);
      for (double t = h; t <= t_max; t += h) fresh += term(t) + term(-t);
      result = h * fresh;
    } else {
      // only odd multiples of h are new at this level
      for (double t = h; t <= t_max; t += 2.0 * h) fresh += term(t) + term(-t);
      result = 0.5 * prev + h * fresh;
    }
    if (level >= 3 &&
        std::abs(result - prev) <= rel_tol * std::max(1e-300, std::abs(result)))
      return result;
    prev = result;
  }
  return result;
}

}  // namespace htlab
