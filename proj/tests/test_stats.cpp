#include <doctest.h>

#include <cmath>
#include <vector>

#include "ajcir/rng.hpp"
#include "ajcir/stats.hpp"

using namespace ajcir;

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3.5 * v - 2.0);
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.rss == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("wilson interval brackets the estimate") {
  const auto ci = wilson_interval(10, 1000);
  CHECK(ci.estimate == doctest::Approx(0.01));
  CHECK(ci.lo < 0.01);
  CHECK(ci.hi > 0.01);
  CHECK(ci.lo >= 0.0);
  const auto all = wilson_interval(1000, 1000);
  CHECK(all.hi <= 1.0);
}

TEST_CASE("quantile interpolates") {
  std::vector<double> xs{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(xs, 0.0) == 1.0);
  CHECK(quantile(xs, 1.0) == 4.0);
  CHECK(quantile(xs, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("ks two-sample p-value behaves") {
  RngStream rng(11, 0);
  std::vector<double> a, b, c;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(rng.uniform());
    b.push_back(rng.uniform());
    c.push_back(rng.uniform() + 0.3);
  }
  CHECK(ks_two_sample_pvalue(a, b) > 0.01);
  CHECK(ks_two_sample_pvalue(a, c) < 1e-6);
}

TEST_CASE("complex mean and jackknife-style se") {
  std::vector<std::complex<double>> zs{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const auto m = complex_mean_se(zs);
  CHECK(std::abs(m.value) == doctest::Approx(0.0));
  CHECK(m.se == doctest::Approx(std::sqrt(4.0 / (4.0 * 3.0))));
}

TEST_CASE("kahan sum stays exact for adversarial sequences") {
  KahanSum s;
  s.add(1e16);
  for (int i = 0; i < 10000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == doctest::Approx(10000.0));
}
