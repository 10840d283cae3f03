#pragma once

#include <complex>
#include <functional>

namespace ajcir {

// Adaptive integral over a finite interval [a, b]; tolerates integrable
// endpoint singularities.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10);

// Adaptive integral over [a, infinity).
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double tol = 1e-10);

std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double tol = 1e-10);

// Upper incomplete gamma Gamma(s, x) for real s in (-1, 0) and complex x
// with Re(x) >= 0, x != 0. Series for small |x|, Lentz continued fraction
// otherwise.
std::complex<double> upper_incomplete_gamma(double s, std::complex<double> x);

}  // namespace ajcir
