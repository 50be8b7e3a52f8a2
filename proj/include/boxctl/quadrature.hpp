#pragma once

#include <functional>

namespace boxctl::quadrature {

using Integrand = std::function<double(double)>;

/// Fixed 128-point Gauss-Legendre rule on [lo, hi].
double gauss_legendre_128(const Integrand& f, double lo, double hi);

/// Composite rule: `panels` equal panels of 64-point Gauss-Legendre.
double composite_gauss_legendre(const Integrand& f, double lo, double hi, int panels);

/// Adaptive tanh-sinh with absolute tolerance `tol`. Throws
/// NumericalError when the error estimate stays above tol.
double adaptive(const Integrand& f, double lo, double hi, double tol);

}  // namespace boxctl::quadrature
