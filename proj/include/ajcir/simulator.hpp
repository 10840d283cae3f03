#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ajcir/levy_rng.hpp"
#include "ajcir/model.hpp"
#include "ajcir/rng.hpp"

namespace ajcir {

struct SamplePath {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::uint64_t stream_id = 0;
};

enum class KeepMode { Full, Terminal, Snapshots };

// Monte-Carlo ensemble; reproducible from (params, x0, T, dt, n_paths,
// master_seed) with stream_id = path index regardless of thread count.
struct PathEnsemble {
  ModelParams params;
  Eigen::VectorXd x0;
  double T = 0.0;
  double dt = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t master_seed = 0;
  KeepMode keep = KeepMode::Terminal;

  std::vector<double> snapshot_times;
  // One (n_paths x m) matrix per snapshot time; rows indexed by path.
  std::vector<Eigen::MatrixXd> snapshots;
  std::vector<SamplePath> paths;  // Full mode only

  double small_jump_l1_bound = 0.0;  // per-step compensation bias bound

  const Eigen::MatrixXd& terminal() const { return snapshots.back(); }
};

// One-step scheme: freeze coefficients, add the stable and subordinator
// increments, clamp at the boundary (the exact process is nonnegative and
// the volatility vanishes there).
class EulerScheme {
 public:
  EulerScheme(const ModelParams& params, double dt);
  void step(Eigen::VectorXd& x, RngStream& rng) const;
  double dt() const { return dt_; }
  double small_jump_l1_bound() const {
    return subordinator_.small_jump_l1_bound();
  }

 private:
  ModelParams params_;
  double dt_;
  std::vector<double> inv_alpha_;
  std::vector<StableSampler> stable_;
  SubordinatorSampler subordinator_;
};

Eigen::VectorXd euler_step(const ModelParams& params, const Eigen::VectorXd& x,
                           double dt, RngStream& rng);

PathEnsemble simulate_ensemble(const ModelParams& params,
                               const Eigen::VectorXd& x0, double T, double dt,
                               std::size_t n_paths, std::uint64_t master_seed,
                               KeepMode keep = KeepMode::Terminal,
                               std::span<const double> snapshot_times = {},
                               int n_threads = 0);

// Same noise streams with the off-diagonal drift removed; with the same
// master_seed the coupling realizes the pathwise comparison X_k >= Y_k.
PathEnsemble simulate_comparison_diagonal(const ModelParams& params,
                                          const Eigen::VectorXd& x0, double T,
                                          double dt, std::size_t n_paths,
                                          std::uint64_t master_seed,
                                          KeepMode keep = KeepMode::Terminal,
                                          std::span<const double> snapshot_times = {},
                                          int n_threads = 0);

struct ComparisonSummary {
  double fraction_dominating = 0.0;  // grid points with X_k >= Y_k - 1e-12
  double worst_gap = 0.0;            // most negative X_k - Y_k observed
  std::size_t points_checked = 0;
};

// Runs the full and diagonal dynamics on common noise and tallies the
// pathwise domination X_k >= Y_k across the grid.
ComparisonSummary comparison_experiment(const ModelParams& params,
                                        const Eigen::VectorXd& x0, double T,
                                        double dt, std::size_t n_paths,
                                        std::uint64_t master_seed,
                                        int n_threads = 0);

// E[X^x(t)] = e^{beta t} x + Int_0^t e^{beta s} (b + Int z nu(dz)) ds via an
// augmented matrix exponential. Throws when nu has no first moment.
Eigen::VectorXd mean_formula(const ModelParams& params, const Eigen::VectorXd& x,
                             double t);

struct CharProbe {
  Eigen::VectorXd y;            // probe frequency (char fn at u = i y)
  std::complex<double> value;   // jackknife mean of exp(i<y, X>)
  double se = 0.0;
};

// Empirical characteristic function of the terminal slice.
std::vector<CharProbe> empirical_char(const Eigen::MatrixXd& terminal_states,
                                      std::span<const Eigen::VectorXd> probes);

struct BoundaryRow {
  double eps = 0.0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct BoundaryReport {
  std::vector<BoundaryRow> rows;
  double loglog_slope = 0.0;  // across the strictly positive eps entries
  bool condition_a_ok = true;
};

BoundaryReport boundary_hit_probability(const ModelParams& params,
                                        const Eigen::VectorXd& x0, double t,
                                        std::span<const double> eps_list,
                                        std::size_t n_paths, double dt,
                                        std::uint64_t master_seed,
                                        int n_threads = 0);

struct RateCoordinate {
  double fitted_exponent = 0.0;
  double target_exponent = 0.0;  // eta * kappa_i
  std::vector<double> log_eps;
  std::vector<double> log_moment;
};

struct RateReport {
  std::vector<RateCoordinate> coordinates;
  double dt_ref = 0.0;
};

// Convergence-rate experiment for the one-step-frozen approximation built
// from the same noise increments as a fine-grid reference path.
RateReport weak_error_rate_experiment(const ModelParams& params,
                                      const Eigen::VectorXd& x0, double t,
                                      std::span<const double> eps_grid,
                                      double eta, std::size_t n_paths,
                                      std::uint64_t master_seed,
                                      int n_threads = 0);

// kappa_i = min{1 + 1/alpha_max, 1/alpha_i + 1/alpha_i^2}.
Eigen::VectorXd euler_rate_exponents(const Eigen::VectorXd& alpha);

// Default step-size rule keeping the one-step bias below Monte-Carlo noise
// at the sample sizes used here.
double default_dt(double T);

}  // namespace ajcir
