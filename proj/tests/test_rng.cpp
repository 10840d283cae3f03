#include <doctest.h>

#include <cmath>
#include <vector>

#include "ajcir/rng.hpp"
#include "ajcir/stats.hpp"

using namespace ajcir;

TEST_CASE("equal (seed, stream) pairs replay identical sequences") {
  RngStream a(123456789, 42);
  RngStream b(123456789, 42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.uniform() == b.uniform());
  CHECK(a.exponential() == b.exponential());
}

TEST_CASE("distinct streams decorrelate") {
  const int n = 20000;
  RngStream a(7, 0), b(7, 1);
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double corr = (sxy / n - sx / n * sy / n) /
                      std::sqrt((sxx / n - sx / n * sx / n) *
                                (syy / n - sy / n * sy / n));
  CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("uniform moments") {
  RngStream rng(99, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(std::abs(s / n - 0.5) < 0.005);
  CHECK(std::abs(s2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("poisson matches its mean") {
  RngStream rng(5, 3);
  const int n = 100000;
  for (double mean : {0.1, 2.5, 40.0}) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += static_cast<double>(rng.poisson(mean));
    const double se = std::sqrt(mean / n);
    CHECK(std::abs(s / n - mean) < 5.0 * se);
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK(rng.poisson(-1.0) == 0);
}
