#include "ajcir/riccati.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ajcir {

using C = std::complex<double>;

namespace {

void require_left_halfplane(const Eigen::VectorXcd& u, const char* who) {
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (u[j].real() > 1e-12) {
      std::ostringstream msg;
      msg << who << ": Re(u[" << j << "]) = " << u[j].real()
          << " leaves the left half-plane";
      throw std::domain_error(msg.str());
    }
  }
}

// Pull a component back onto the closed left half-plane before taking the
// principal power; keeps round-off from crossing the branch cut.
inline C clip_left(C u) {
  return u.real() > 0.0 ? C(0.0, u.imag()) : u;
}

}  // namespace

C F_func(const ModelParams& params, const Eigen::VectorXcd& u) {
  require_left_halfplane(u, "F_func");
  C lin(0.0, 0.0);
  for (int k = 0; k < params.m; ++k) lin += params.b[k] * u[k];
  return lin + levy_exp_integral(params.levy, u);
}

Eigen::VectorXcd R_func(const ModelParams& params, const Eigen::VectorXcd& u) {
  require_left_halfplane(u, "R_func");
  Eigen::VectorXcd r = params.beta.transpose() * u;
  for (int j = 0; j < params.m; ++j) {
    const C uj = clip_left(u[j]);
    if (uj != C(0.0, 0.0))
      r[j] += params.sigma[j] * std::pow(-uj, params.alpha[j]);
  }
  return r;
}

namespace {

// Shared RHS of the coupled (psi, phi...) system. The first m components are
// psi; each PhiPart appends one quadrature component.
struct RiccatiRhs {
  const ModelParams& params;
  std::vector<std::function<C(const Eigen::VectorXcd&)>> phi_parts;

  void operator()(double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
    const int m = params.m;
    Eigen::VectorXcd psi(m);
    for (int j = 0; j < m; ++j) psi[j] = clip_left(y[j]);
    dy.resize(y.size());
    dy.head(m) = R_func(params, psi);
    for (std::size_t i = 0; i < phi_parts.size(); ++i)
      dy[m + static_cast<Eigen::Index>(i)] = phi_parts[i](psi);
  }
};

OdeSignal check_psi_invariant(const ModelParams& params, double t,
                              const Eigen::VectorXcd& y, double tol) {
  for (int j = 0; j < params.m; ++j) {
    if (y[j].real() > tol) {
      std::ostringstream msg;
      msg << "solve_riccati: Re(psi[" << j << "]) = " << y[j].real()
          << " > " << tol << " at t = " << t << " (invariant violation)";
      throw std::runtime_error(msg.str());
    }
  }
  return OdeSignal::Continue;
}

}  // namespace

std::vector<RiccatiState> solve_riccati(const ModelParams& params,
                                        const Eigen::VectorXcd& u0,
                                        std::span<const double> t_out,
                                        const RiccatiOptions& opts) {
  if (u0.size() != params.m)
    throw std::invalid_argument("solve_riccati: u0 has wrong dimension");
  require_left_halfplane(u0, "solve_riccati");
  for (std::size_t i = 1; i < t_out.size(); ++i)
    if (!(t_out[i] > t_out[i - 1]))
      throw std::invalid_argument("solve_riccati: t_out must be increasing");
  if (!t_out.empty() && t_out.front() < 0.0)
    throw std::invalid_argument("solve_riccati: negative output time");

  const int m = params.m;
  RiccatiRhs rhs{params, {}};
  rhs.phi_parts.push_back(
      [&params](const Eigen::VectorXcd& psi) { return F_func(params, psi); });

  Eigen::VectorXcd y0(m + 1);
  y0.head(m) = u0;
  y0[m] = C(0.0, 0.0);

  std::vector<RiccatiState> states;
  states.reserve(t_out.size());
  auto record = [&](double t, const Eigen::VectorXcd& y) {
    states.push_back({t, y[m], y.head(m)});
  };

  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  try {
    integrate_dopri5(
        [&rhs](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
          rhs(t, y, dy);
        },
        0.0, y0, t_out, record, ode,
        [&](double t, const Eigen::VectorXcd& y) {
          return check_psi_invariant(params, t, y, opts.psi_real_tol);
        });
  } catch (const std::runtime_error& e) {
    std::ostringstream msg;
    msg << e.what() << " (u0 = [";
    for (int j = 0; j < m; ++j)
      msg << u0[j] << (j + 1 < m ? ", " : "]");
    msg << ")";
    throw std::runtime_error(msg.str());
  }
  return states;
}

double closed_form_psi_1d(double alpha, double kappa, double rho, double s) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::domain_error("closed_form_psi_1d: alpha must lie in (1,2)");
  if (kappa == 0.0)
    throw std::domain_error("closed_form_psi_1d: kappa must be nonzero");
  if (!(rho > 0.0))
    throw std::domain_error("closed_form_psi_1d: rho must be > 0");
  if (s < 0.0) throw std::domain_error("closed_form_psi_1d: s must be >= 0");
  const double bracket =
      (std::pow(rho, 1.0 - alpha) - 1.0 / kappa) *
          std::exp(-kappa * (alpha - 1.0) * s) +
      1.0 / kappa;
  if (!(bracket > 0.0))
    throw std::domain_error(
        "closed_form_psi_1d: outside the admissible s-range (bracket <= 0)");
  return -std::pow(bracket, 1.0 / (1.0 - alpha));
}

CharFnValue char_function(const ModelParams& params, const Eigen::VectorXd& x,
                          double t, const Eigen::VectorXcd& u,
                          const RiccatiOptions& opts, bool keep_trajectory) {
  if (x.size() != params.m)
    throw std::invalid_argument("char_function: x has wrong dimension");
  if (t < 0.0) throw std::invalid_argument("char_function: t must be >= 0");
  require_left_halfplane(u, "char_function");

  CharFnValue out;
  if (t == 0.0) {
    C dot(0.0, 0.0);
    for (int k = 0; k < params.m; ++k) dot += x[k] * u[k];
    out.value = std::exp(dot);
    return out;
  }
  std::vector<double> t_grid;
  if (keep_trajectory) {
    const int n = 64;
    for (int i = 1; i <= n; ++i) t_grid.push_back(t * i / n);
  } else {
    t_grid.push_back(t);
  }
  auto states = solve_riccati(params, u, t_grid, opts);
  const RiccatiState& fin = states.back();
  C expo = fin.phi;
  for (int k = 0; k < params.m; ++k) expo += x[k] * fin.psi[k];
  out.value = std::exp(expo);
  out.error_estimate = opts.rtol * (1.0 + std::abs(expo)) * std::abs(out.value);
  if (keep_trajectory) out.trajectory = std::move(states);
  return out;
}

SplitCharValue split_char(const ModelParams& params, const Eigen::VectorXd& x,
                          double t, const Eigen::VectorXcd& u,
                          const RiccatiOptions& opts) {
  if (x.size() != params.m)
    throw std::invalid_argument("split_char: x has wrong dimension");
  require_left_halfplane(u, "split_char");

  const LevyMeasureSpec small_part = truncate_levy(params.levy, 1.0);
  const int m = params.m;

  // State: psi, phi0 (drift + small jumps), phi1 (big jumps).
  RiccatiRhs rhs{params, {}};
  rhs.phi_parts.push_back([&](const Eigen::VectorXcd& psi) {
    C lin(0.0, 0.0);
    for (int k = 0; k < m; ++k) lin += params.b[k] * psi[k];
    return lin + levy_exp_integral(small_part, psi);
  });
  rhs.phi_parts.push_back([&](const Eigen::VectorXcd& psi) {
    return levy_exp_integral(params.levy, psi) -
           levy_exp_integral(small_part, psi);
  });

  Eigen::VectorXcd y0(m + 2);
  y0.head(m) = u;
  y0[m] = y0[m + 1] = C(0.0, 0.0);

  SplitCharValue out;
  if (t == 0.0) {
    C dot(0.0, 0.0);
    for (int k = 0; k < m; ++k) dot += x[k] * u[k];
    out.q0 = std::exp(dot);
    out.q1 = C(1.0, 0.0);
    return out;
  }

  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  const double t_grid[1] = {t};
  Eigen::VectorXcd y_end;
  double t_end;
  std::tie(t_end, y_end) = integrate_dopri5(
      [&rhs](double tt, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        rhs(tt, y, dy);
      },
      0.0, y0, t_grid, {}, ode,
      [&](double tt, const Eigen::VectorXcd& y) {
        return check_psi_invariant(params, tt, y, opts.psi_real_tol);
      });
  C dot(0.0, 0.0);
  for (int k = 0; k < m; ++k) dot += x[k] * y_end[k];
  out.q0 = std::exp(y_end[m] + dot);
  out.q1 = std::exp(y_end[m + 1]);
  return out;
}

std::complex<double> invariant_char(const ModelParams& params,
                                    const Eigen::VectorXcd& u, double tol,
                                    double s_max, const RiccatiOptions& opts) {
  require_left_halfplane(u, "invariant_char");
  if (!is_subcritical(params.beta))
    throw std::runtime_error(
        "invariant_char: beta is not subcritical; no invariant measure");
  if (!log_moment_holds(params.levy))
    throw std::runtime_error(
        "invariant_char: log-moment condition fails for nu");

  const int m = params.m;
  RiccatiRhs rhs{params, {}};
  rhs.phi_parts.push_back(
      [&params](const Eigen::VectorXcd& psi) { return F_func(params, psi); });

  Eigen::VectorXcd y0(m + 1);
  y0.head(m) = u;
  y0[m] = C(0.0, 0.0);

  OdeOptions ode;
  ode.rtol = opts.rtol;
  ode.atol = opts.atol;
  const double t_grid[1] = {s_max};

  int quiet_steps = 0;
  bool converged = false;
  auto monitor = [&](double t, const Eigen::VectorXcd& y) {
    check_psi_invariant(params, t, y, opts.psi_real_tol);
    Eigen::VectorXcd psi(m);
    for (int j = 0; j < m; ++j) psi[j] = clip_left(y[j]);
    const double f_mag = std::abs(F_func(params, psi));
    if (f_mag < tol * std::max(1.0, std::abs(y[m]))) {
      if (++quiet_steps >= 5) {
        converged = true;
        return OdeSignal::Stop;
      }
    } else {
      quiet_steps = 0;
    }
    return OdeSignal::Continue;
  };

  auto [t_end, y_end] = integrate_dopri5(
      [&rhs](double tt, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        rhs(tt, y, dy);
      },
      0.0, y0, t_grid, {}, ode, monitor);
  if (!converged) {
    std::ostringstream msg;
    msg << "invariant_char: tail criterion |F(psi)| < tol*max(1,|phi|) not met "
           "by s_max = "
        << s_max;
    throw std::runtime_error(msg.str());
  }
  return y_end[m];
}

}  // namespace ajcir
