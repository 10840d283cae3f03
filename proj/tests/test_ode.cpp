#include <doctest.h>

#include <cmath>
#include <complex>

#include "ajcir/ode.hpp"

using namespace ajcir;
using C = std::complex<double>;

TEST_CASE("exponential decay to machine-level accuracy") {
  Eigen::VectorXcd y0(1);
  y0 << C(1.0, 0.0);
  std::vector<double> t_out{0.5, 1.0, 2.0};
  std::vector<std::pair<double, C>> seen;
  integrate_dopri5(
      [](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = -3.0 * y;
      },
      0.0, y0, t_out,
      [&](double t, const Eigen::VectorXcd& y) { seen.emplace_back(t, y[0]); });
  REQUIRE(seen.size() == 3);
  for (const auto& [t, v] : seen)
    CHECK(std::abs(v - std::exp(-3.0 * t)) < 1e-9);
}

TEST_CASE("complex rotation preserves modulus") {
  Eigen::VectorXcd y0(1);
  y0 << C(1.0, 0.0);
  std::vector<double> t_out{3.14159};
  auto [t_end, y_end] = integrate_dopri5(
      [](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = C(0.0, 1.0) * y;
      },
      0.0, y0, t_out, {});
  CHECK(std::abs(std::abs(y_end[0]) - 1.0) < 1e-10);
  CHECK(std::abs(y_end[0] - std::exp(C(0.0, t_end))) < 1e-9);
}

TEST_CASE("monitor can stop the integration early") {
  Eigen::VectorXcd y0(1);
  y0 << C(1.0, 0.0);
  std::vector<double> t_out{100.0};
  auto [t_end, y_end] = integrate_dopri5(
      [](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy = -y;
      },
      0.0, y0, t_out, {}, {},
      [](double, const Eigen::VectorXcd& y) {
        return std::abs(y[0]) < 1e-4 ? OdeSignal::Stop : OdeSignal::Continue;
      });
  CHECK(t_end < 100.0);
  CHECK(std::abs(y_end[0]) < 1e-4);
  CHECK(std::abs(y_end[0]) > 1e-6);
}

TEST_CASE("nonlinear problem against the logistic solution") {
  // y' = y (1 - y), y(0) = 0.1; solution 1 / (1 + 9 e^{-t}).
  Eigen::VectorXcd y0(1);
  y0 << C(0.1, 0.0);
  std::vector<double> t_out{1.0, 4.0};
  std::vector<C> vals;
  integrate_dopri5(
      [](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        dy[0] = y[0] * (1.0 - y[0]);
      },
      0.0, y0, t_out,
      [&](double, const Eigen::VectorXcd& y) { vals.push_back(y[0]); });
  CHECK(std::abs(vals[0] - 1.0 / (1.0 + 9.0 * std::exp(-1.0))) < 1e-9);
  CHECK(std::abs(vals[1] - 1.0 / (1.0 + 9.0 * std::exp(-4.0))) < 1e-9);
}
