#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "ajcir/model.hpp"
#include "ajcir/riccati.hpp"

namespace ajcir {

struct GridAxis {
  double origin = 0.0;
  double step = 1.0;
  int count = 0;

  double at(int i) const { return origin + step * i; }
  double last() const { return at(count - 1); }
};

// Tabulated density (or rho_delta-weighted density) on a uniform grid.
struct DensityGrid {
  std::vector<GridAxis> axes;
  std::vector<double> values;  // row-major over the axes
  std::optional<double> weight_delta;  // set when values carry rho_delta

  // Inversion diagnostics (1d Fourier ops only).
  double clipped_mass = 0.0;
  double u_max = 0.0;
  double du = 0.0;
  bool suspect = false;

  int dims() const { return static_cast<int>(axes.size()); }
  std::size_t size() const { return values.size(); }
  double integral() const;  // trapezoid over the grid
};

// Mean order of smoothness and anisotropy axes: 1/alpha_bar is the average
// of 1/alpha_i and a_i = alpha_bar / alpha_i (so sum a_i = m).
struct Anisotropy {
  double alpha_bar = 0.0;
  Eigen::VectorXd a;
};

Anisotropy anisotropy(const Eigen::VectorXd& alpha);

// Boundary weight min{delta, y_1^{1/alpha_1}, ..., y_m^{1/alpha_m}} on the
// nonnegative orthant, 0 outside.
double rho_delta(const Eigen::VectorXd& y, double delta,
                 const Eigen::VectorXd& alpha);

struct HeatKernelOptions {
  double trunc_tol = 1e-12;  // stop extending the u-grid below this modulus
  double u_cap = 2e5;        // truncation-failure beyond this frequency
  double alias_factor = 1.1;
  RiccatiOptions riccati{};
  bool probe_condition_a = true;
};

// Characteristic-exponent table phi(t, iu_j), psi(t, iu_j) on the uniform
// frequency grid u_j = j du; one Riccati solve per point, reusable across
// initial states and derivative orders.
class CharTable1D {
 public:
  // y_abs_max fixes du = pi / (alias_factor * y_abs_max); the table extends
  // until exp(Re phi) (an upper bound for |char| uniform in x >= 0) falls
  // below trunc_tol, or throws a truncation-failure error at u_cap.
  static CharTable1D build(const ModelParams& params, double t,
                           double y_abs_max, const HeatKernelOptions& opts = {});

  // Same table for the invariant law: phi(inf, iu_j), psiersatz = 0.
  static CharTable1D build_invariant(const ModelParams& params,
                                     double y_abs_max,
                                     const HeatKernelOptions& opts = {});

  // Density (x_order = y_order = 0) or mixed derivative
  // d^n/dx^n d^k/dy^k p_t(x, .) on the y grid.
  DensityGrid invert(double x, const GridAxis& y_axis, int x_order = 0,
                     int y_order = 0) const;

  // Densities for several initial states sharing the phase factors; row i
  // holds p_t(x_values[i], .) on the y grid.
  Eigen::MatrixXd invert_many(std::span<const double> x_values,
                              const GridAxis& y_axis) const;

  double du() const { return du_; }
  double u_max() const { return du_ * static_cast<double>(phi_.size() - 1); }
  bool condition_a_warned() const { return condition_a_warned_; }

 private:
  double t_ = 0.0;
  double du_ = 0.0;
  bool invariant_ = false;
  bool condition_a_warned_ = false;
  std::vector<std::complex<double>> phi_;
  std::vector<std::complex<double>> psi_;
};

DensityGrid heat_kernel_1d(const ModelParams& params, double x, double t,
                           const GridAxis& y_axis,
                           const HeatKernelOptions& opts = {});

// Derivative orders n (initial state) and k (terminal state), n + k <= 4.
DensityGrid heat_kernel_derivative_1d(const ModelParams& params, double x,
                                      double t, const GridAxis& y_axis, int n,
                                      int k, const HeatKernelOptions& opts = {});

DensityGrid invariant_density_1d(const ModelParams& params,
                                 const GridAxis& y_axis,
                                 const HeatKernelOptions& opts = {});

// Logarithmic probe set for the sup over h in the difference seminorms:
// 17 points per sign spanning [h_min, h_max].
std::vector<double> default_h_set(double h_min, double h_max = 1.0);

// Anisotropic Besov norm ||f||_{L1} + sum_k sup_h |h|^{-lambda/a_k}
// ||Delta_{h e_k} f||_{L1}, the sup approximated over h_set.
double besov_norm(const DensityGrid& grid, double lambda, const Anisotropy& aniso,
                  std::span<const double> h_set);

// Holder-Zygmund analogue with sup-norms.
double holder_zygmund_norm(const DensityGrid& grid, double eta,
                           const Anisotropy& aniso,
                           std::span<const double> h_set);

// Product-Gaussian kernel density estimate of the rho_delta-weighted density
// on the given axes. Empty bandwidth selects a per-axis Silverman rule
// scaled by the anisotropy weights a_i.
DensityGrid weighted_kde(const Eigen::MatrixXd& samples, double delta,
                         const Eigen::VectorXd& alpha,
                         const std::vector<GridAxis>& axes,
                         Eigen::VectorXd bandwidth = {});

}  // namespace ajcir
