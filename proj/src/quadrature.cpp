#include "boxctl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "boxctl/error.hpp"

namespace boxctl::quadrature {

namespace bq = boost::math::quadrature;

double gauss_legendre_128(const Integrand& f, double lo, double hi) {
  return bq::gauss<double, 128>::integrate(f, lo, hi);
}

double composite_gauss_legendre(const Integrand& f, double lo, double hi, int panels) {
  if (panels < 1) throw UsageError("composite_gauss_legendre: panels must be >= 1");
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) sum += bq::gauss<double, 64>::integrate(f, lo + p * h, lo + (p + 1) * h);
  return sum;
}

double adaptive(const Integrand& f, double lo, double hi, double tol) {
  // Gauss-Kronrod sums unscaled sub-interval errors, which never settles for
  // integrands that vanish up to rounding; tanh-sinh reports a usable estimate.
  thread_local bq::tanh_sinh<double> rule;
  double err = 0.0, l1 = 0.0;
  // The stopping rule is relative to int |f|.
  const double l1_rough = bq::gauss<double, 64>::integrate([&f](double x) { return std::abs(f(x)); }, lo, hi);
  const double rel = std::min(0.5 * tol / std::max(l1_rough, 1e-300), 1e-3);
  const double value = rule.integrate([&f](double x) { return f(x); }, lo, hi, rel, &err, &l1);
  if (!(err <= tol))
    throw NumericalError("quadrature", "adaptive quadrature error estimate " + std::to_string(err) +
                                           " exceeds tolerance " + std::to_string(tol));
  return value;
}

}  // namespace boxctl::quadrature
