#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "ajcir/model.hpp"
#include "ajcir/ode.hpp"

namespace ajcir {

// One point of the exact characteristic-function exponent: phi(t, u0) and
// psi(t, u0) solving the generalized Riccati system.
struct RiccatiState {
  double t = 0.0;
  std::complex<double> phi;
  Eigen::VectorXcd psi;
};

struct RiccatiOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  // Invariant guard: Re(psi) staying below this triggers no action; above it
  // the solve aborts with an invariant-violation error.
  double psi_real_tol = 1e-8;
};

// F(u) = <b, u> + Int (e^{<u,z>} - 1) nu(dz), Re(u) <= 0 componentwise.
std::complex<double> F_func(const ModelParams& params, const Eigen::VectorXcd& u);

// R_j(u) = sum_k beta_{kj} u_k + sigma_j (-u_j)^{alpha_j} with principal
// branch powers; Re(u) <= 0 keeps -u_j in the closed right half-plane.
Eigen::VectorXcd R_func(const ModelParams& params, const Eigen::VectorXcd& u);

// Integrates d/dt (psi, phi) = (R(psi), F(psi)) from (u0, 0), reporting the
// state at every requested output time (increasing, first may be 0).
std::vector<RiccatiState> solve_riccati(const ModelParams& params,
                                        const Eigen::VectorXcd& u0,
                                        std::span<const double> t_out,
                                        const RiccatiOptions& opts = {});

// Closed-form solution of ds F = kappa F + (-F)^alpha, F(0) = -rho:
// F(s) = -((rho^{1-alpha} - 1/kappa) e^{-kappa (alpha-1) s} + 1/kappa)^{1/(1-alpha)}.
// Throws std::domain_error when the bracket is not positive.
double closed_form_psi_1d(double alpha, double kappa, double rho, double s);

struct CharFnValue {
  std::complex<double> value;
  double error_estimate = 0.0;
  std::vector<RiccatiState> trajectory;  // filled on request
};

// E[e^{<u, X^x(t)>}] = exp(phi(t,u) + <x, psi(t,u)>).
CharFnValue char_function(const ModelParams& params, const Eigen::VectorXd& x,
                          double t, const Eigen::VectorXcd& u,
                          const RiccatiOptions& opts = {},
                          bool keep_trajectory = false);

// Characteristic functions of the convolution factors splitting nu at
// |z| = 1: Q0 carries b, the small-jump part and the x-dependence; Q1 the
// big-jump part started at 0. Their product equals char_function.
struct SplitCharValue {
  std::complex<double> q0;
  std::complex<double> q1;
};
SplitCharValue split_char(const ModelParams& params, const Eigen::VectorXd& x,
                          double t, const Eigen::VectorXcd& u,
                          const RiccatiOptions& opts = {});

// phi(inf, u) = Int_0^inf F(psi(s,u)) ds for subcritical models with a
// log-moment; the exponent of the invariant characteristic function.
std::complex<double> invariant_char(const ModelParams& params,
                                    const Eigen::VectorXcd& u,
                                    double tol = 1e-10, double s_max = 1e4,
                                    const RiccatiOptions& opts = {});

}  // namespace ajcir
