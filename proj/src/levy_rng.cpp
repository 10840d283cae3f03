#include "ajcir/levy_rng.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "ajcir/quad.hpp"

namespace ajcir {

using std::numbers::pi;

double c_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::domain_error("c_alpha: alpha must lie in (1,2)");
  return boost::math::tgamma(2.0 - alpha) / (alpha * (alpha - 1.0));
}

// ---------------------------------------------------------------------------
// Spectrally positive stable sampler
// ---------------------------------------------------------------------------

StableSampler::StableSampler(double alpha, double t) : alpha_(alpha) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::domain_error("StableSampler: alpha must lie in (1,2)");
  if (!(t > 0.0)) throw std::domain_error("StableSampler: t must be > 0");
  inv_alpha_ = 1.0 / alpha;
  expo_ = (1.0 - alpha) / alpha;
  // Maximally skewed (beta = +1) trigonometric transform constants.
  const double tn = std::tan(pi * alpha / 2.0);
  skew_shift_ = std::atan(tn) / alpha;
  skew_scale_ = std::pow(1.0 + tn * tn, 0.5 / alpha);
  // Scale mapping the unit variate onto the Laplace exponent t xi^alpha.
  scale_ = std::pow(t * std::abs(std::cos(pi * alpha / 2.0)), inv_alpha_);
}

double StableSampler::sample(RngStream& rng) const {
  const double v = pi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double x = skew_scale_ * std::sin(alpha_ * (v + skew_shift_)) /
                   std::pow(std::cos(v), inv_alpha_) *
                   std::pow(std::cos(v - alpha_ * (v + skew_shift_)) / w, expo_);
  return scale_ * x;
}

double sample_stable_spec_positive(const StableParams& sp, double t,
                                   RngStream& rng) {
  return StableSampler(sp.alpha, t).sample(rng);
}

double sample_one_sided_stable(double theta, double scale, RngStream& rng) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::domain_error("sample_one_sided_stable: theta must lie in (0,1)");
  if (!(scale >= 0.0))
    throw std::domain_error("sample_one_sided_stable: scale must be >= 0");
  if (scale == 0.0) {
    rng.uniform();
    rng.exponential();
    return 0.0;
  }
  // Kanter's representation of the unit variate, E[e^{-l S0}] = e^{-l^theta}.
  const double u = pi * rng.uniform();
  const double w = rng.exponential();
  const double a = std::pow(std::sin(theta * u), theta / (1.0 - theta)) *
                   std::sin((1.0 - theta) * u) /
                   std::pow(std::sin(u), 1.0 / (1.0 - theta));
  const double s0 = std::pow(a / w, (1.0 - theta) / theta);
  const double c = std::pow(
      scale * boost::math::tgamma(1.0 - theta) / theta, 1.0 / theta);
  return c * s0;
}

// ---------------------------------------------------------------------------
// Subordinator increments
// ---------------------------------------------------------------------------

SubordinatorSampler::SubordinatorSampler(const LevyMeasureSpec& spec, int m,
                                         double dt)
    : m_(m), dt_(dt), drift_(Eigen::VectorXd::Zero(m)) {
  if (!(dt > 0.0))
    throw std::invalid_argument("SubordinatorSampler: dt must be > 0");
  build(spec, std::numeric_limits<double>::infinity());
}

void SubordinatorSampler::build(const LevyMeasureSpec& spec, double radius) {
  const bool truncated = std::isfinite(radius);
  std::visit(
      [&](const auto& lv) {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          (void)lv;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          if (!truncated) {
            for (int k = 0; k < m_; ++k) {
              if (lv.weight[k] <= 0.0) continue;
              const double theta = lv.theta[k];
              const double scale = std::pow(
                  dt_ * lv.weight[k] * boost::math::tgamma(1.0 - theta) / theta,
                  1.0 / theta);
              stable_axes_.push_back({k, theta, scale});
            }
            return;
          }
          eps_ = std::min(std::sqrt(dt_), 1e-3);
          for (int k = 0; k < m_; ++k) {
            if (lv.weight[k] <= 0.0) continue;
            const double theta = lv.theta[k];
            const double lo = std::min(eps_, radius);
            PowerLawJet jet;
            jet.dir = Eigen::VectorXd::Unit(m_, k);
            jet.theta = theta;
            jet.lo = lo;
            jet.hi = radius;
            jet.mean_count = dt_ * lv.weight[k] *
                             (std::pow(lo, -theta) - std::pow(radius, -theta)) /
                             theta;
            if (jet.mean_count > 0.0) jets_.push_back(jet);
            const double neglected =
                dt_ * lv.weight[k] * std::pow(lo, 1.0 - theta) / (1.0 - theta);
            drift_[k] += neglected;
            small_jump_l1_ += neglected;
          }
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          eps_ = std::min(std::sqrt(dt_), 1e-3);
          const double hi = truncated ? radius
                                      : std::numeric_limits<double>::infinity();
          for (const auto& [dir, mass] : lv.atoms) {
            if (mass <= 0.0) continue;
            const double lo = std::min(eps_, hi);
            PowerLawJet jet;
            jet.dir = dir;
            jet.theta = lv.theta;
            jet.lo = lo;
            jet.hi = hi;
            const double tail =
                std::isfinite(hi) ? std::pow(hi, -lv.theta) : 0.0;
            jet.mean_count =
                dt_ * mass * (std::pow(lo, -lv.theta) - tail) / lv.theta;
            if (jet.mean_count > 0.0) jets_.push_back(jet);
            const double neglected =
                dt_ * mass * std::pow(lo, 1.0 - lv.theta) / (1.0 - lv.theta);
            drift_ += neglected * dir;
            small_jump_l1_ += neglected;
          }
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          eps_ = std::min(std::sqrt(dt_), 1e-3);
          const double hi = truncated ? radius
                                      : std::numeric_limits<double>::infinity();
          for (int k = 0; k < m_; ++k) {
            const double theta = lv.theta[k];
            const auto& g = lv.g[k];
            const double lo = std::min(eps_, hi);
            PowerLawJet jet;
            jet.dir = Eigen::VectorXd::Unit(m_, k);
            jet.theta = theta;
            jet.lo = lo;
            jet.hi = hi;
            jet.tempered = true;
            jet.temper = g;
            const double tail = std::isfinite(hi) ? std::pow(hi, -theta) : 0.0;
            // Dominating measure sup(g) z^{-1-theta}; thinning restores g.
            jet.mean_count =
                dt_ * g.sup_bound * (std::pow(lo, -theta) - tail) / theta;
            if (jet.mean_count > 0.0) jets_.push_back(jet);
            const double neglected =
                dt_ * integrate(
                          [&](double z) { return g(z) * std::pow(z, -theta); },
                          0.0, lo, 1e-10);
            drift_[k] += neglected;
            small_jump_l1_ += neglected;
          }
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          build(*lv.inner, truncated ? std::min(radius, lv.radius) : lv.radius);
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          CompoundPoissonPart part;
          part.mean_count = lv.rate * dt_;
          part.jump = lv.jump;
          part.radius = truncated ? radius
                                  : std::numeric_limits<double>::infinity();
          cp_parts_.push_back(std::move(part));
        }
      },
      spec.v);
}

namespace {

Eigen::VectorXd sample_cp_jump(const JumpDist& jump, int m, RngStream& rng) {
  switch (jump.kind) {
    case JumpDist::Kind::Dirac:
      return jump.value;
    case JumpDist::Kind::Exponential: {
      Eigen::VectorXd j(m);
      for (int k = 0; k < m; ++k) j[k] = jump.value[k] * rng.exponential();
      return j;
    }
    case JumpDist::Kind::Custom:
      return jump.sampler(rng);
  }
  return Eigen::VectorXd::Zero(m);
}

}  // namespace

Eigen::VectorXd SubordinatorSampler::sample(RngStream& rng) const {
  Eigen::VectorXd incr = drift_;
  for (const auto& axis : stable_axes_) {
    // Kanter draw with the precomputed scale (two uniforms per draw).
    const double u = pi * rng.uniform();
    const double w = rng.exponential();
    const double a = std::pow(std::sin(axis.theta * u),
                              axis.theta / (1.0 - axis.theta)) *
                     std::sin((1.0 - axis.theta) * u) /
                     std::pow(std::sin(u), 1.0 / (1.0 - axis.theta));
    incr[axis.k] +=
        axis.scale * std::pow(a / w, (1.0 - axis.theta) / axis.theta);
  }
  for (const auto& part : cp_parts_) {
    const std::uint64_t n = rng.poisson(part.mean_count);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Eigen::VectorXd j = sample_cp_jump(part.jump, m_, rng);
      if (j.norm() <= part.radius) incr += j;
    }
  }
  for (const auto& jet : jets_) {
    const std::uint64_t n = rng.poisson(jet.mean_count);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double u = rng.uniform();
      double r;
      if (std::isfinite(jet.hi)) {
        const double plo = std::pow(jet.lo, -jet.theta);
        const double phi = std::pow(jet.hi, -jet.theta);
        r = std::pow(plo - u * (plo - phi), -1.0 / jet.theta);
      } else {
        r = jet.lo * std::pow(u, -1.0 / jet.theta);
      }
      if (jet.tempered) {
        const double accept = rng.uniform();
        if (accept * jet.temper.sup_bound > jet.temper(r)) continue;
      }
      incr += r * jet.dir;
    }
  }
  return incr;
}

Eigen::VectorXd sample_subordinator_increment(const LevyMeasureSpec& spec,
                                              int m, double dt,
                                              RngStream& rng) {
  return SubordinatorSampler(spec, m, dt).sample(rng);
}

// ---------------------------------------------------------------------------
// Stable density diagnostics
// ---------------------------------------------------------------------------

std::vector<double> stable_density_grid(double alpha, double t, double z_origin,
                                        double z_step, int n_points) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::domain_error("stable_density_grid: alpha must lie in (1,2)");
  if (!(t > 0.0)) throw std::domain_error("stable_density_grid: t must be > 0");
  // |chi(u)| = exp(t |u|^alpha cos(pi alpha / 2)); solve for the point where
  // it reaches 1e-16.
  const double decay = std::abs(std::cos(pi * alpha / 2.0));
  const double u_max = std::pow(16.0 * std::numbers::ln10 / (t * decay),
                                1.0 / alpha);
  const double z_span =
      std::max(std::abs(z_origin),
               std::abs(z_origin + z_step * (n_points - 1)));
  const double du = pi / (1.1 * std::max(z_span, 1.0));
  const int n_u = static_cast<int>(u_max / du) + 1;
  if (!(n_u > 8))
    throw std::runtime_error("stable_density_grid: truncation bound not met");

  std::vector<double> density(n_points, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_points; ++i) {
    const double z = z_origin + z_step * i;
    double acc = 0.0;
    for (int j = 0; j <= n_u; ++j) {
      const double u = du * j;
      // (-iu)^alpha on the principal branch.
      const std::complex<double> miu(0.0, -u);
      const std::complex<double> chi = std::exp(t * std::pow(miu, alpha));
      const double weight = (j == 0 || j == n_u) ? 0.5 : 1.0;
      acc += weight * (std::exp(std::complex<double>(0.0, -z * u)) * chi).real();
    }
    density[i] = acc * du / pi;
  }
  return density;
}

std::vector<StableDerivativeRow> stable_density_derivative_l1_check(
    double alpha, std::span<const double> t_list) {
  std::vector<StableDerivativeRow> rows;
  for (double t : t_list) {
    const double scale = std::pow(t, 1.0 / alpha);
    // Window and resolution proportional to the self-similar scale so the
    // relative truncation error is identical across t.
    const double span = 60.0 * scale;
    const double step = 0.01 * scale;
    const int n = static_cast<int>(2.0 * span / step) + 1;
    const auto f = stable_density_grid(alpha, t, -span, step, n);
    double l1 = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double df = (f[i + 1] - f[i - 1]) / (2.0 * step);
      l1 += std::abs(df) * step;
    }
    rows.push_back({t, l1, l1 * std::pow(t, 1.0 / alpha)});
  }
  return rows;
}

}  // namespace ajcir
