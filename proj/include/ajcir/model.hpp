#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ajcir/rng.hpp"

namespace ajcir {

// ---------------------------------------------------------------------------
// Levy measure of the immigration subordinator.
//
// Every variant is supported on the nonnegative orthant and integrates
// min{1,|z|}; for the stable-type families this forces theta in (0,1).
// ---------------------------------------------------------------------------

struct LevyZero {};

// Independent one-sided stable subordinators per coordinate:
// nu(dz) = sum_k weight[k] z_k^{-1-theta[k]} dz_k on the k-th axis.
struct LevyCoordinateStable {
  Eigen::VectorXd theta;
  Eigen::VectorXd weight;
};

// Radial stable measure with a finite atomic angular part:
// nu(A) = sum_i mass_i Int 1_A(r s_i) r^{-1-theta} dr.
struct LevySpherical {
  double theta = 0.5;
  std::vector<std::pair<Eigen::VectorXd, double>> atoms;  // (direction, mass)
};

// Per-coordinate tempering function descriptor, g bounded on [0, inf).
struct TemperingFn {
  enum class Kind { Constant, Exponential, Custom };
  Kind kind = Kind::Constant;
  double c = 1.0;  // Constant: g = c; Exponential: g(z) = c exp(-a z)
  double a = 0.0;
  std::function<double(double)> custom;  // Custom only
  double sup_bound = 1.0;                // declared sup g (all kinds)
  bool tail_first_moment_finite = false;

  double operator()(double z) const;
};

// nu(dz) = sum_k g_k(z_k) z_k^{-1-theta[k]} dz_k on the coordinate axes.
struct LevyTemperedCoordinate {
  Eigen::VectorXd theta;
  std::vector<TemperingFn> g;
};

struct LevyMeasureSpec;

// Restriction of another measure to {|z| <= radius}.
struct LevyTruncated {
  std::shared_ptr<const LevyMeasureSpec> inner;
  double radius = 1.0;
};

// Jump-size distribution of a compound-Poisson subordinator.
struct JumpDist {
  enum class Kind { Dirac, Exponential, Custom };
  Kind kind = Kind::Dirac;
  Eigen::VectorXd value;  // Dirac: the atom; Exponential: per-coordinate means
  std::function<Eigen::VectorXd(RngStream&)> sampler;  // Custom only
  std::optional<bool> has_first_moment;  // Custom moment metadata
  std::optional<bool> has_log_moment;
};

struct LevyCompoundPoisson {
  double rate = 1.0;
  JumpDist jump;
};

struct LevyMeasureSpec {
  std::variant<LevyZero, LevyCoordinateStable, LevySpherical,
               LevyTemperedCoordinate, LevyTruncated, LevyCompoundPoisson>
      v;

  bool is_zero() const { return std::holds_alternative<LevyZero>(v); }
};

LevyMeasureSpec truncate_levy(const LevyMeasureSpec& spec, double radius);

// Quasi-uniform atomic discretization of the uniform angular measure on the
// positive part of the unit sphere (m <= 3), total mass as given.
std::vector<std::pair<Eigen::VectorXd, double>> uniform_sphere_atoms(
    int m, int n_atoms, double total_mass = 1.0);

// ---------------------------------------------------------------------------
// Full parameter set of the SDE.
// ---------------------------------------------------------------------------

struct ModelParams {
  int m = 1;
  Eigen::VectorXd b;      // immigration drift, >= 0
  Eigen::MatrixXd beta;   // drift matrix, off-diagonal >= 0
  Eigen::VectorXd sigma;  // volatility scales, > 0
  Eigen::VectorXd alpha;  // stability indices, each in (1,2)
  LevyMeasureSpec levy;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every admissibility invariant; returns one entry per violation.
ValidationReport validate(const ModelParams& params);

// Throws std::invalid_argument listing all violations unless valid.
void require_valid(const ModelParams& params);

// ---------------------------------------------------------------------------
// Levy-measure functionals.
// ---------------------------------------------------------------------------

// Int (exp(<u,z>) - 1) nu(dz) for componentwise Re(u) <= 0. Closed form for
// the stable-type families, incomplete-gamma/quadrature for truncated and
// tempered ones. Throws std::domain_error if some Re(u_j) > 1e-12 and
// std::runtime_error for non-evaluable compound-Poisson jump laws.
std::complex<double> levy_exp_integral(const LevyMeasureSpec& spec,
                                       const Eigen::VectorXcd& u);

// Int z nu(dz); throws std::runtime_error when nu has no first moment
// (untruncated stable tails).
Eigen::VectorXd levy_mean(const LevyMeasureSpec& spec, int m);

// Int_{|z| <= eps} |z| nu(dz); the bias bound reported by samplers that
// mean-compensate the small-jump part.
double levy_small_jump_l1(const LevyMeasureSpec& spec, int m, double eps);

struct ImmigrationValue {
  double value = 0.0;
  double standard_error = 0.0;  // Monte-Carlo fallback only
  bool exact = true;
};

// b_k xi + Int (1 - exp(-xi z_k)) nu(dz). Monte-Carlo fallback (with SE)
// for compound-Poisson specs whose jump law is only available as a sampler.
ImmigrationValue immigration_functional(const ModelParams& params, int k,
                                        double xi);

// ---------------------------------------------------------------------------
// Condition (A) checker: fits the growth exponent of the immigration
// functional on the upper half of a log-spaced probe grid.
// ---------------------------------------------------------------------------

struct ConditionAReport {
  struct Coordinate {
    double vartheta_fit = 0.0;
    double c_fit = 0.0;
    double m_used = 0.0;  // smallest xi entering the fit window
    bool satisfied = false;
  };
  std::vector<Coordinate> per_coordinate;
  bool overall = false;
};

inline constexpr double kConditionASlopeTolerance = 0.02;

ConditionAReport check_condition_a(const ModelParams& params,
                                   std::span<const double> xi_grid);

// True iff all eigenvalues of beta have real part < -1e-10.
bool is_subcritical(const Eigen::MatrixXd& beta);

// Log-moment condition on the big jumps of nu. Throws std::runtime_error
// for custom jump laws without declared moment metadata.
bool log_moment_holds(const LevyMeasureSpec& spec);

}  // namespace ajcir
