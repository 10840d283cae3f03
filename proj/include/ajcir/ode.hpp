#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <utility>

namespace ajcir {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-4;
  double min_step = 1e-13;
  std::size_t max_steps = 5000000;
};

enum class OdeSignal { Continue, Stop };

using OdeRhs =
    std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;
using OdeOutput = std::function<void(double, const Eigen::VectorXcd&)>;
using OdeMonitor = std::function<OdeSignal(double, const Eigen::VectorXcd&)>;

// Adaptive Dormand-Prince 5(4) pair on complex state vectors. Integrates
// from t0 through the sorted output times, shrinking steps to land on them
// exactly; `monitor` (optional) runs after every accepted step and may stop
// the integration early. Returns the final (t, y).
//
// Throws std::runtime_error when the controller drives the step below
// min_step or the step budget is exhausted.
std::pair<double, Eigen::VectorXcd> integrate_dopri5(
    const OdeRhs& rhs, double t0, const Eigen::VectorXcd& y0,
    std::span<const double> t_out, const OdeOutput& on_output,
    const OdeOptions& opts = {}, const OdeMonitor& monitor = {});

}  // namespace ajcir
