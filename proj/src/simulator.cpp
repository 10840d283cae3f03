#include "ajcir/simulator.hpp"

#include <omp.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ajcir/stats.hpp"

namespace ajcir {

namespace {

int resolve_threads(int n_threads) {
  return n_threads > 0 ? n_threads : omp_get_max_threads();
}

std::size_t steps_for(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0))
    throw std::invalid_argument("simulate: need T > 0 and dt > 0");
  if (dt > T) throw std::invalid_argument("simulate: dt must be <= T");
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

}  // namespace

double default_dt(double T) { return std::min(0.01, T / 1000.0); }

// ---------------------------------------------------------------------------
// Euler scheme
// ---------------------------------------------------------------------------

EulerScheme::EulerScheme(const ModelParams& params, double dt)
    : params_(params), dt_(dt), subordinator_(params.levy, params.m, dt) {
  for (int i = 0; i < params_.m; ++i) {
    inv_alpha_.push_back(1.0 / params_.alpha[i]);
    stable_.emplace_back(params_.alpha[i], dt);
  }
}

void EulerScheme::step(Eigen::VectorXd& x, RngStream& rng) const {
  const int m = params_.m;
  Eigen::VectorXd drift = params_.b + params_.beta * x;
  // Draw order is fixed (stable increments by coordinate, then the
  // subordinator) so paired runs can share noise.
  Eigen::VectorXd dz(m);
  for (int i = 0; i < m; ++i) dz[i] = stable_[i].sample(rng);
  const Eigen::VectorXd dj = subordinator_.sample(rng);
  for (int i = 0; i < m; ++i) {
    const double vol = std::pow(params_.sigma[i] * x[i], inv_alpha_[i]);
    x[i] = std::max(0.0, x[i] + drift[i] * dt_ + vol * dz[i] + dj[i]);
  }
}

Eigen::VectorXd euler_step(const ModelParams& params, const Eigen::VectorXd& x,
                           double dt, RngStream& rng) {
  if ((x.array() < 0.0).any())
    throw std::invalid_argument("euler_step: state must be nonnegative");
  EulerScheme scheme(params, dt);
  Eigen::VectorXd out = x;
  scheme.step(out, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

namespace {

PathEnsemble run_ensemble(const ModelParams& params, const Eigen::VectorXd& x0,
                          double T, double dt, std::size_t n_paths,
                          std::uint64_t master_seed, KeepMode keep,
                          std::span<const double> snapshot_times,
                          int n_threads) {
  require_valid(params);
  if (x0.size() != params.m)
    throw std::invalid_argument("simulate: x0 has wrong dimension");
  if ((x0.array() < 0.0).any())
    throw std::invalid_argument("simulate: x0 must be nonnegative");
  if (n_paths == 0) throw std::invalid_argument("simulate: n_paths must be > 0");

  const std::size_t n_steps = steps_for(T, dt);
  const double dt_eff = T / static_cast<double>(n_steps);
  const EulerScheme scheme(params, dt_eff);

  PathEnsemble ens;
  ens.params = params;
  ens.x0 = x0;
  ens.T = T;
  ens.dt = dt_eff;
  ens.n_paths = n_paths;
  ens.master_seed = master_seed;
  ens.keep = keep;
  ens.small_jump_l1_bound = scheme.small_jump_l1_bound();

  // Map requested snapshot times onto grid steps.
  std::vector<std::size_t> snap_steps;
  if (keep == KeepMode::Terminal) {
    ens.snapshot_times = {T};
    snap_steps = {n_steps};
  } else if (keep == KeepMode::Snapshots) {
    if (snapshot_times.empty())
      throw std::invalid_argument("simulate: snapshot mode needs times");
    for (double s : snapshot_times) {
      if (s < 0.0 || s > T + 1e-9)
        throw std::invalid_argument("simulate: snapshot time outside [0,T]");
      const auto step = static_cast<std::size_t>(std::llround(s / dt_eff));
      if (!snap_steps.empty() && step < snap_steps.back())
        throw std::invalid_argument("simulate: snapshot times must be increasing");
      snap_steps.push_back(std::min(step, n_steps));
      ens.snapshot_times.push_back(static_cast<double>(snap_steps.back()) *
                                   dt_eff);
    }
  }
  const int m = params.m;
  for (std::size_t s = 0; s < snap_steps.size(); ++s)
    ens.snapshots.emplace_back(n_paths, m);
  if (keep == KeepMode::Full) ens.paths.resize(n_paths);

#pragma omp parallel for schedule(static) num_threads(resolve_threads(n_threads))
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n_paths); ++p) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(p));
    Eigen::VectorXd x = x0;
    SamplePath* path = nullptr;
    if (keep == KeepMode::Full) {
      path = &ens.paths[p];
      path->stream_id = static_cast<std::uint64_t>(p);
      path->times.push_back(0.0);
      path->states.push_back(x);
    }
    std::size_t snap_idx = 0;
    while (snap_idx < snap_steps.size() && snap_steps[snap_idx] == 0) {
      ens.snapshots[snap_idx].row(p) = x.transpose();
      ++snap_idx;
    }
    for (std::size_t s = 1; s <= n_steps; ++s) {
      scheme.step(x, rng);
      if (path) {
        path->times.push_back(static_cast<double>(s) * dt_eff);
        path->states.push_back(x);
      }
      while (snap_idx < snap_steps.size() && snap_steps[snap_idx] == s) {
        ens.snapshots[snap_idx].row(p) = x.transpose();
        ++snap_idx;
      }
    }
  }
  return ens;
}

}  // namespace

PathEnsemble simulate_ensemble(const ModelParams& params,
                               const Eigen::VectorXd& x0, double T, double dt,
                               std::size_t n_paths, std::uint64_t master_seed,
                               KeepMode keep,
                               std::span<const double> snapshot_times,
                               int n_threads) {
  return run_ensemble(params, x0, T, dt, n_paths, master_seed, keep,
                      snapshot_times, n_threads);
}

PathEnsemble simulate_comparison_diagonal(const ModelParams& params,
                                          const Eigen::VectorXd& x0, double T,
                                          double dt, std::size_t n_paths,
                                          std::uint64_t master_seed,
                                          KeepMode keep,
                                          std::span<const double> snapshot_times,
                                          int n_threads) {
  ModelParams diag = params;
  diag.beta = params.beta.diagonal().asDiagonal();
  return run_ensemble(diag, x0, T, dt, n_paths, master_seed, keep,
                      snapshot_times, n_threads);
}

ComparisonSummary comparison_experiment(const ModelParams& params,
                                        const Eigen::VectorXd& x0, double T,
                                        double dt, std::size_t n_paths,
                                        std::uint64_t master_seed,
                                        int n_threads) {
  require_valid(params);
  ModelParams diag = params;
  diag.beta = params.beta.diagonal().asDiagonal();

  const std::size_t n_steps = steps_for(T, dt);
  const double dt_eff = T / static_cast<double>(n_steps);
  const EulerScheme full(params, dt_eff);
  const EulerScheme diagonal(diag, dt_eff);
  const int m = params.m;

  std::vector<double> worst(n_paths, 0.0);
  std::vector<std::size_t> bad(n_paths, 0);

#pragma omp parallel for schedule(static) num_threads(resolve_threads(n_threads))
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(n_paths); ++p) {
    // Two streams with identical state realize common random numbers.
    RngStream rng_x(master_seed, static_cast<std::uint64_t>(p));
    RngStream rng_y(master_seed, static_cast<std::uint64_t>(p));
    Eigen::VectorXd x = x0, y = x0;
    for (std::size_t s = 1; s <= n_steps; ++s) {
      full.step(x, rng_x);
      diagonal.step(y, rng_y);
      for (int k = 0; k < m; ++k) {
        const double gap = x[k] - y[k];
        worst[p] = std::min(worst[p], gap);
        if (gap < -1e-12) ++bad[p];
      }
    }
  }

  ComparisonSummary out;
  out.points_checked = n_paths * n_steps * static_cast<std::size_t>(m);
  std::size_t total_bad = 0;
  double w = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    total_bad += bad[p];
    w = std::min(w, worst[p]);
  }
  out.worst_gap = w;
  out.fraction_dominating =
      1.0 - static_cast<double>(total_bad) / static_cast<double>(out.points_checked);
  return out;
}

// ---------------------------------------------------------------------------
// Moments and characteristic function probes
// ---------------------------------------------------------------------------

Eigen::VectorXd mean_formula(const ModelParams& params, const Eigen::VectorXd& x,
                             double t) {
  if (x.size() != params.m)
    throw std::invalid_argument("mean_formula: x has wrong dimension");
  Eigen::VectorXd b_tilde;
  try {
    b_tilde = params.b + levy_mean(params.levy, params.m);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("mean_formula: ") + e.what());
  }
  const int m = params.m;
  // exp([[beta, b~],[0,0]] t) carries Int_0^t e^{beta s} b~ ds in the last
  // column.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(m + 1, m + 1);
  aug.topLeftCorner(m, m) = params.beta;
  aug.topRightCorner(m, 1) = b_tilde;
  const Eigen::MatrixXd e = (aug * t).exp();
  return e.topLeftCorner(m, m) * x + e.topRightCorner(m, 1);
}

std::vector<CharProbe> empirical_char(const Eigen::MatrixXd& terminal_states,
                                      std::span<const Eigen::VectorXd> probes) {
  const Eigen::Index n = terminal_states.rows();
  if (n < 2) throw std::invalid_argument("empirical_char: need >= 2 paths");
  std::vector<CharProbe> out;
  out.reserve(probes.size());
  for (const auto& y : probes) {
    if (y.size() != terminal_states.cols())
      throw std::invalid_argument("empirical_char: probe has wrong dimension");
    std::vector<std::complex<double>> vals(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phase = terminal_states.row(i).dot(y);
      vals[i] = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    const auto m = complex_mean_se(vals);
    out.push_back({y, m.value, m.se});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary behavior
// ---------------------------------------------------------------------------

BoundaryReport boundary_hit_probability(const ModelParams& params,
                                        const Eigen::VectorXd& x0, double t,
                                        std::span<const double> eps_list,
                                        std::size_t n_paths, double dt,
                                        std::uint64_t master_seed,
                                        int n_threads) {
  BoundaryReport report;
  {
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i) grid.push_back(std::pow(10.0, -1.0 + 4.0 * i / 15.0));
    try {
      report.condition_a_ok = check_condition_a(params, grid).overall;
    } catch (const std::exception&) {
      report.condition_a_ok = false;
    }
  }
  const auto ens = simulate_ensemble(params, x0, t, dt, n_paths, master_seed,
                                     KeepMode::Terminal, {}, n_threads);
  const Eigen::VectorXd min_coord = ens.terminal().rowwise().minCoeff();

  std::vector<double> lx, ly;
  for (double eps : eps_list) {
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < min_coord.size(); ++i)
      if (min_coord[i] <= eps) ++hits;
    const auto ci = wilson_interval(hits, n_paths);
    report.rows.push_back({eps, ci.estimate, ci.lo, ci.hi});
    if (eps > 0.0 && ci.estimate > 0.0) {
      lx.push_back(std::log(eps));
      ly.push_back(std::log(ci.estimate));
    }
  }
  if (lx.size() >= 2) report.loglog_slope = fit_line(lx, ly).slope;
  return report;
}

// ---------------------------------------------------------------------------
// Euler rate experiment
// ---------------------------------------------------------------------------

Eigen::VectorXd euler_rate_exponents(const Eigen::VectorXd& alpha) {
  const double a_max = alpha.maxCoeff();
  Eigen::VectorXd kappa(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    kappa[i] = std::min(1.0 + 1.0 / a_max,
                        1.0 / alpha[i] + 1.0 / (alpha[i] * alpha[i]));
  return kappa;
}

RateReport weak_error_rate_experiment(const ModelParams& params,
                                      const Eigen::VectorXd& x0, double t,
                                      std::span<const double> eps_grid,
                                      double eta, std::size_t n_paths,
                                      std::uint64_t master_seed,
                                      int n_threads) {
  require_valid(params);
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("weak_error_rate_experiment: eta must be in (0,1)");
  if (eps_grid.size() < 2)
    throw std::invalid_argument("weak_error_rate_experiment: need >= 2 eps values");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] < eps_grid[i - 1]))
      throw std::invalid_argument(
          "weak_error_rate_experiment: eps_grid must be decreasing");
  const double eps_min = eps_grid.back();
  if (!(eps_min > 0.0 && eps_grid.front() < t))
    throw std::invalid_argument(
        "weak_error_rate_experiment: eps values must lie in (0, t)");

  const int m = params.m;
  // Reference grid much finer than the smallest eps; every eps and t itself
  // are rounded onto it.
  const double dt_ref = eps_min / 8.0;
  const std::size_t n_steps = static_cast<std::size_t>(std::llround(t / dt_ref));
  const std::size_t n_eps = eps_grid.size();
  std::vector<std::size_t> eps_steps(n_eps);
  for (std::size_t e = 0; e < n_eps; ++e)
    eps_steps[e] = static_cast<std::size_t>(std::llround(eps_grid[e] / dt_ref));

  const EulerScheme scheme(params, dt_ref);
  const SubordinatorSampler subsampler(params.levy, m, dt_ref);

  // Accumulated eta-moments of |X_i(t) - X_i^eps(t)| per (eps, coordinate).
  std::vector<std::vector<KahanSum>> sums(n_eps, std::vector<KahanSum>(m));

  std::vector<double> inv_alpha(m);
  for (int i = 0; i < m; ++i) inv_alpha[i] = 1.0 / params.alpha[i];

  const int threads = resolve_threads(n_threads);
  // Store per-path contributions and reduce in path order afterwards for
  // thread-count independence.
  std::vector<std::vector<double>> per_path(n_paths,
                                            std::vector<double>(n_eps * m));

#pragma omp parallel num_threads(threads)
  {
    std::vector<StableSampler> stable;
    for (int i = 0; i < m; ++i) stable.emplace_back(params.alpha[i], dt_ref);
#pragma omp for schedule(static)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(n_paths); ++p) {
      RngStream rng(master_seed, static_cast<std::uint64_t>(p));
      Eigen::VectorXd x = x0;
      Eigen::VectorXd cum_z = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd cum_j = Eigen::VectorXd::Zero(m);
      // Frozen state and cumulative noise at each breakpoint t - eps.
      std::vector<Eigen::VectorXd> x_at(n_eps), z_at(n_eps), j_at(n_eps);
      for (std::size_t s = 0; s < n_steps; ++s) {
        for (std::size_t e = 0; e < n_eps; ++e) {
          if (s == n_steps - eps_steps[e]) {
            x_at[e] = x;
            z_at[e] = cum_z;
            j_at[e] = cum_j;
          }
        }
        Eigen::VectorXd drift = params.b + params.beta * x;
        Eigen::VectorXd dz(m);
        for (int i = 0; i < m; ++i) dz[i] = stable[i].sample(rng);
        const Eigen::VectorXd dj = subsampler.sample(rng);
        cum_z += dz;
        cum_j += dj;
        for (int i = 0; i < m; ++i) {
          const double vol = std::pow(params.sigma[i] * x[i], inv_alpha[i]);
          x[i] = std::max(0.0, x[i] + drift[i] * dt_ref + vol * dz[i] + dj[i]);
        }
      }
      for (std::size_t e = 0; e < n_eps; ++e) {
        const double eps = static_cast<double>(eps_steps[e]) * dt_ref;
        const Eigen::VectorXd drift = params.b + params.beta * x_at[e];
        for (int i = 0; i < m; ++i) {
          const double vol =
              std::pow(params.sigma[i] * x_at[e][i], inv_alpha[i]);
          const double x_eps = x_at[e][i] + drift[i] * eps +
                               vol * (cum_z[i] - z_at[e][i]) +
                               (cum_j[i] - j_at[e][i]);
          per_path[p][e * m + i] = std::pow(std::abs(x[i] - x_eps), eta);
        }
      }
    }
  }
  for (std::size_t p = 0; p < n_paths; ++p)
    for (std::size_t e = 0; e < n_eps; ++e)
      for (int i = 0; i < m; ++i) sums[e][i].add(per_path[p][e * m + i]);

  const Eigen::VectorXd kappa = euler_rate_exponents(params.alpha);
  RateReport report;
  report.dt_ref = dt_ref;
  for (int i = 0; i < m; ++i) {
    RateCoordinate coord;
    coord.target_exponent = eta * kappa[i];
    bool degenerate = true;
    for (std::size_t e = 0; e < n_eps; ++e) {
      const double moment =
          sums[e][i].value() / static_cast<double>(n_paths);
      if (moment > 0.0) degenerate = false;
      coord.log_eps.push_back(
          std::log(static_cast<double>(eps_steps[e]) * dt_ref));
      coord.log_moment.push_back(moment > 0.0 ? std::log(moment)
                                              : -std::numeric_limits<double>::infinity());
    }
    if (degenerate)
      throw std::runtime_error(
          "weak_error_rate_experiment: approximation coincides with the "
          "reference (degenerate data, nothing to fit)");
    coord.fitted_exponent = fit_line(coord.log_eps, coord.log_moment).slope;
    report.coordinates.push_back(std::move(coord));
  }
  return report;
}

}  // namespace ajcir
