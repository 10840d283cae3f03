#include "ajcir/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ajcir {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// y5 - y4 error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

std::pair<double, Eigen::VectorXcd> integrate_dopri5(
    const OdeRhs& rhs, double t0, const Eigen::VectorXcd& y0,
    std::span<const double> t_out, const OdeOutput& on_output,
    const OdeOptions& opts, const OdeMonitor& monitor) {
  const Eigen::Index n = y0.size();
  Eigen::VectorXcd y = y0;
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Eigen::VectorXcd ytmp(n), ynew(n), yerr(n);

  double t = t0;
  std::size_t next_out = 0;
  // Emit output times that coincide with the start.
  while (next_out < t_out.size() && t_out[next_out] <= t0) {
    if (on_output) on_output(t_out[next_out], y);
    ++next_out;
  }
  const double t_end = t_out.empty() ? t0 : t_out.back();
  if (t_end <= t0 || next_out >= t_out.size()) return {t, y};

  rhs(t, y, k1);  // FSAL seed
  double h = std::min(opts.initial_step, t_end - t0);

  for (std::size_t step = 0; step < opts.max_steps; ++step) {
    if (t >= t_end || next_out >= t_out.size()) return {t, y};
    const double t_target = t_out[next_out];
    const bool clamped = h > t_target - t;
    const double hs = clamped ? t_target - t : h;

    ytmp = y + hs * (a21 * k1);
    rhs(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    rhs(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + hs, ynew, k7);
    yerr = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale =
          opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = std::abs(yerr[i]) / scale;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      t += hs;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      if (monitor && monitor(t, y) == OdeSignal::Stop) return {t, y};
      while (next_out < t_out.size() &&
             t >= t_out[next_out] - 1e-14 * (1.0 + std::abs(t))) {
        if (on_output) on_output(t_out[next_out], y);
        ++next_out;
      }
      const double fac =
          std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      // A landing-shortened step must not shrink the controller proposal.
      h = clamped ? std::max(h, hs * fac) : hs * fac;
    } else {
      h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      if (h < opts.min_step) {
        std::ostringstream msg;
        msg << "integrate_dopri5: step size underflow at t = " << t;
        throw std::runtime_error(msg.str());
      }
    }
  }
  throw std::runtime_error("integrate_dopri5: step budget exhausted");
}

}  // namespace ajcir
