#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace stablefield::detail {

struct Quadrature {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (7, 15); a panel is accepted when its error is
// below max(tol, rel * |value|) or the depth runs out. Boost's
// single-panel call reports the error on the reference interval [-1, 1],
// so it is rescaled here.
template <class G>
void gauss_kronrod(const G& g, double a, double b, double tol, double rel, int depth, Quadrature& acc) {
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, 0, 0.0, &err);
  err *= 0.5 * (b - a);
  if (err <= tol || err <= rel * std::abs(value) || depth == 0) {
    acc.value += value;
    acc.error += err;
    return;
  }
  const double mid = 0.5 * (a + b);
  gauss_kronrod(g, a, mid, 0.5 * tol, rel, depth - 1, acc);
  gauss_kronrod(g, mid, b, 0.5 * tol, rel, depth - 1, acc);
}

}  // namespace stablefield::detail
