#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ajcir/model.hpp"

namespace ajcir {

// Norm matrix M solving M beta + beta^T M = -I together with the norm
// equivalence constants c_*^2 = lambda_min(M), (c^*)^2 = lambda_max(M).
struct LyapunovData {
  Eigen::MatrixXd M;
  double c_star = 0.0;
  double c_superstar = 0.0;
  double residual = 0.0;  // ||M beta + beta^T M + I||_F
};

// Solves the continuous Lyapunov equation as a linear system in the
// m(m+1)/2 symmetric unknowns. Throws for non-subcritical beta.
LyapunovData solve_M(const Eigen::MatrixXd& beta);

// V(x) = (1 + |x|_M^2)^{1/2} >= 1.
double V_value(const Eigen::VectorXd& x, const LyapunovData& lyap);

// Extended generator applied to V for a model whose nu is of Truncated
// type (the small-jump part nu_0). All integrals reduce to stable
// quadratures via exact algebraic cancellation of the Taylor terms.
double generator_on_V(const ModelParams& params, const Eigen::VectorXd& x,
                      const LyapunovData& lyap, double quad_tol = 1e-9);

struct DriftCertificate {
  double c1 = 0.0;
  double c2 = 0.0;
  bool ok = false;  // c1 > 0 and the grid guard held
  std::vector<Eigen::VectorXd> grid;
  std::vector<double> l0v;  // generator values on the grid
};

// Fits L_0 V <= -c1 V + c2 over a log-radial evaluation grid, maximizing c1
// subject to the binding point staying off the outer decade of the grid.
DriftCertificate drift_certificate(const ModelParams& params,
                                   const LyapunovData& lyap,
                                   double radius_max = 1e3,
                                   int n_radii = 24);

struct TvDetails {
  double value = 0.0;   // full-mass convention, range [0,2]
  std::size_t cells = 0;
  // Histogram estimates are biased upward by binning noise; compare against
  // a same-size self-distance floor.
};

// Total variation between two sample clouds on a common equal-mass
// (per-axis quantile) histogram grid.
TvDetails tv_distance_detailed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               int bins_per_axis);
double tv_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   int bins_per_axis);

struct DecayRow {
  double t = 0.0;
  double tv = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% interval for the TV estimate
  double ci_hi = 0.0;
  double floor = 0.0;  // self-distance of two halves of one ensemble
  bool used_in_fit = false;
};

struct ErgodicityReport {
  std::vector<DecayRow> rows;
  double delta_hat = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% interval for delta_hat
  double ci_hi = 0.0;
  std::size_t fit_points = 0;
};

// Two-start total-variation decay experiment: simulates ensembles from x
// and y, estimates TV at each time, and fits the exponential rate on the
// window between the noise floor and saturation.
ErgodicityReport ergodicity_experiment(const ModelParams& params,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y,
                                       std::span<const double> t_grid,
                                       std::size_t n_paths,
                                       std::uint64_t master_seed,
                                       double dt = 0.0,  // 0: default rule
                                       int bins_per_axis = 20,
                                       int n_bootstrap = 200,
                                       int n_threads = 0);

struct DobrushinPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double tv = 0.0;
};

struct DobrushinReport {
  double max_tv = 0.0;
  double margin = 0.0;  // 2 - max_tv
  std::vector<DobrushinPair> pairs;
};

// Probes the local Dobrushin condition ||Q_h(x,.) - Q_h(y,.)|| <= 2 - delta
// over pairs with V(x) + V(y) <= R (deterministic corners plus random
// draws).
DobrushinReport dobrushin_check(const ModelParams& params, double R, double h,
                                std::size_t n_pairs, std::size_t n_paths,
                                std::uint64_t master_seed, double dt = 0.0,
                                int bins_per_axis = 12, int n_threads = 0);

}  // namespace ajcir
