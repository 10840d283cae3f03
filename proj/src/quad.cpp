#include "ajcir/quad.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace ajcir {

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double tol) {
  // Split at a+1 so tanh_sinh absorbs a possible singularity at a and
  // exp_sinh handles the tail.
  boost::math::quadrature::tanh_sinh<double> head;
  boost::math::quadrature::exp_sinh<double> tail;
  const double h = head.integrate(f, a, a + 1.0, tol);
  const double t = tail.integrate([&](double z) { return f(a + 1.0 + z); }, tol);
  return h + t;
}

std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double tol) {
  const double re = integrate([&](double z) { return f(z).real(); }, a, b, tol);
  const double im = integrate([&](double z) { return f(z).imag(); }, a, b, tol);
  return {re, im};
}

std::complex<double> upper_incomplete_gamma(double s, std::complex<double> x) {
  using C = std::complex<double>;
  if (!(s > -1.0 && s < 0.0))
    throw std::domain_error("upper_incomplete_gamma: s must lie in (-1,0)");
  if (x.real() < -1e-14 || x == C(0.0, 0.0))
    throw std::domain_error("upper_incomplete_gamma: need Re(x) >= 0, x != 0");

  const double gamma_s = boost::math::tgamma(s);  // finite for s in (-1,0)
  if (std::abs(x) < 4.0) {
    // Gamma(s,x) = Gamma(s) - gamma(s,x), lower part by the standard series
    // gamma(s,x) = x^s e^{-x} sum_n x^n / (s(s+1)...(s+n)).
    C term = C(1.0, 0.0) / s;
    C sum = term;
    for (int n = 1; n <= 500; ++n) {
      term *= x / (s + static_cast<double>(n));
      sum += term;
      if (std::abs(term) < 1e-17 * (1.0 + std::abs(sum))) break;
    }
    const C lower = std::pow(x, s) * std::exp(-x) * sum;
    return gamma_s - lower;
  }
  // Modified Lentz continued fraction:
  // Gamma(s,x) = e^{-x} x^s / (x + 1 - s - 1(1-s)/(x + 3 - s - ...)).
  const double tiny = 1e-300;
  C b = x + 1.0 - s;
  C c = C(1.0 / tiny, 0.0);
  C d = 1.0 / b;
  C h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const C delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x) * std::pow(x, s) * h;
}

}  // namespace ajcir
