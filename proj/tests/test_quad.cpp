#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>

#include "ajcir/quad.hpp"

using namespace ajcir;
using C = std::complex<double>;

TEST_CASE("finite and semi-infinite integrals") {
  CHECK(integrate([](double z) { return z * z; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // endpoint singularity
  CHECK(integrate([](double z) { return 1.0 / std::sqrt(z); }, 0.0, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate_to_inf([](double z) { return std::exp(-z); }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("incomplete gamma: real arguments against the lower-gamma quadrature") {
  for (double theta : {0.3, 0.5, 0.8}) {
    const double s = -theta;
    for (double x : {1e-3, 0.05, 0.5, 1.5, 3.9, 8.0, 30.0}) {
      const double lower = integrate(
          [&](double t) { return std::pow(t, s - 1.0) * std::exp(-t); }, 0.0, x,
          1e-13);
      const double expect = boost::math::tgamma(s) - lower;
      const C got = upper_incomplete_gamma(s, C(x, 0.0));
      CHECK(got.imag() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(got.real() ==
            doctest::Approx(expect).epsilon(1e-8).scale(1.0 + std::abs(expect)));
    }
  }
}

TEST_CASE("incomplete gamma: complex arguments against a decaying quadrature") {
  // Int_1^inf e^{u z} z^{-1-theta} dz = (-u)^theta Gamma(-theta, -u), valid
  // for Re(u) < 0; the oracle integral converges absolutely.
  for (double theta : {0.3, 0.6}) {
    for (C u : {C(-2.0, 0.0), C(-5.0, 3.0), C(-0.6, 4.5), C(-1.0, -8.0),
                C(-12.0, 9.0)}) {
      const C lhs = std::pow(-u, theta) * upper_incomplete_gamma(-theta, -u);
      const C rhs = integrate_complex(
          [&](double z) { return std::exp(u * z) * std::pow(z, -1.0 - theta); },
          1.0, 1.0 + 80.0 / std::abs(u.real()), 1e-13);
      CHECK(std::abs(lhs - rhs) < 1e-8 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST_CASE("incomplete gamma domain guards") {
  CHECK_THROWS_AS(upper_incomplete_gamma(0.5, C(1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(upper_incomplete_gamma(-0.5, C(-1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(upper_incomplete_gamma(-0.5, C(0.0, 0.0)), std::domain_error);
}
