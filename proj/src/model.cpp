#include "ajcir/model.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ajcir/quad.hpp"
#include "ajcir/stats.hpp"

namespace ajcir {

using C = std::complex<double>;

double TemperingFn::operator()(double z) const {
  switch (kind) {
    case Kind::Constant:
      return c;
    case Kind::Exponential:
      return c * std::exp(-a * z);
    case Kind::Custom:
      return custom(z);
  }
  return 0.0;
}

LevyMeasureSpec truncate_levy(const LevyMeasureSpec& spec, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("truncate_levy: radius must be > 0");
  if (const auto* t = std::get_if<LevyTruncated>(&spec.v)) {
    return LevyMeasureSpec{LevyTruncated{t->inner, std::min(t->radius, radius)}};
  }
  return LevyMeasureSpec{
      LevyTruncated{std::make_shared<LevyMeasureSpec>(spec), radius}};
}

std::vector<std::pair<Eigen::VectorXd, double>> uniform_sphere_atoms(
    int m, int n_atoms, double total_mass) {
  if (n_atoms < 1) throw std::invalid_argument("uniform_sphere_atoms: n_atoms < 1");
  std::vector<std::pair<Eigen::VectorXd, double>> atoms;
  const double mass = total_mass / n_atoms;
  if (m == 1) {
    atoms.emplace_back(Eigen::VectorXd::Ones(1), total_mass);
    return atoms;
  }
  if (m == 2) {
    for (int i = 0; i < n_atoms; ++i) {
      const double phi = (i + 0.5) / n_atoms * std::numbers::pi / 2.0;
      Eigen::VectorXd dir(2);
      dir << std::cos(phi), std::sin(phi);
      atoms.emplace_back(dir, mass);
    }
    return atoms;
  }
  if (m == 3) {
    // Golden-ratio lattice, equal-area in (z, azimuth) on the octant.
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < n_atoms; ++i) {
      const double z = (i + 0.5) / n_atoms;
      const double frac = std::fmod((i + 0.5) * golden, 1.0);
      const double phi = frac * std::numbers::pi / 2.0;
      const double r = std::sqrt(1.0 - z * z);
      Eigen::VectorXd dir(3);
      dir << r * std::cos(phi), r * std::sin(phi), z;
      atoms.emplace_back(dir, mass);
    }
    return atoms;
  }
  throw std::invalid_argument("uniform_sphere_atoms: only m <= 3 supported");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void validate_levy(const LevyMeasureSpec& spec, int m, const std::string& where,
                   std::vector<std::string>& out) {
  std::visit(
      [&](const auto& lv) {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          (void)lv;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          if (lv.theta.size() != m || lv.weight.size() != m) {
            out.push_back(where + ": theta/weight must have length m");
            return;
          }
          for (int k = 0; k < m; ++k) {
            if (!(lv.theta[k] > 0.0 && lv.theta[k] < 1.0))
              out.push_back(where + ": theta[" + std::to_string(k) +
                            "] not in (0,1)");
            if (!(lv.weight[k] >= 0.0))
              out.push_back(where + ": weight[" + std::to_string(k) + "] < 0");
          }
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          if (!(lv.theta > 0.0 && lv.theta < 1.0))
            out.push_back(where + ": theta not in (0,1)");
          for (std::size_t i = 0; i < lv.atoms.size(); ++i) {
            const auto& [dir, mass] = lv.atoms[i];
            const std::string tag = where + ": atom " + std::to_string(i);
            if (dir.size() != m) {
              out.push_back(tag + " direction has wrong dimension");
              continue;
            }
            if ((dir.array() < 0.0).any())
              out.push_back(tag + " direction leaves the nonnegative orthant");
            if (std::abs(dir.norm() - 1.0) > 1e-8)
              out.push_back(tag + " direction is not unit length");
            if (!(mass >= 0.0)) out.push_back(tag + " has negative mass");
          }
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          if (lv.theta.size() != m ||
              lv.g.size() != static_cast<std::size_t>(m)) {
            out.push_back(where + ": theta/g must have length m");
            return;
          }
          for (int k = 0; k < m; ++k) {
            if (!(lv.theta[k] > 0.0 && lv.theta[k] < 1.0))
              out.push_back(where + ": theta[" + std::to_string(k) +
                            "] not in (0,1)");
            const auto& g = lv.g[k];
            if (!(std::isfinite(g.sup_bound) && g.sup_bound > 0.0))
              out.push_back(where + ": g[" + std::to_string(k) +
                            "] must declare a finite positive sup bound");
            if (g.kind == TemperingFn::Kind::Custom && !g.custom)
              out.push_back(where + ": g[" + std::to_string(k) +
                            "] custom handle is empty");
          }
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          if (!(lv.radius > 0.0)) out.push_back(where + ": radius must be > 0");
          if (!lv.inner) {
            out.push_back(where + ": truncated spec has no inner measure");
            return;
          }
          validate_levy(*lv.inner, m, where + "/inner", out);
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          if (!(lv.rate > 0.0)) out.push_back(where + ": rate must be > 0");
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac:
              if (lv.jump.value.size() != m)
                out.push_back(where + ": dirac jump has wrong dimension");
              else if ((lv.jump.value.array() < 0.0).any())
                out.push_back(where + ": dirac jump leaves the orthant");
              break;
            case JumpDist::Kind::Exponential:
              if (lv.jump.value.size() != m)
                out.push_back(where + ": exponential means have wrong dimension");
              else if ((lv.jump.value.array() <= 0.0).any())
                out.push_back(where + ": exponential means must be > 0");
              break;
            case JumpDist::Kind::Custom:
              if (!lv.jump.sampler)
                out.push_back(where + ": custom jump sampler is empty");
              break;
          }
        }
      },
      spec.v);
}

}  // namespace

ValidationReport validate(const ModelParams& params) {
  ValidationReport report;
  auto& out = report.violations;
  const int m = params.m;
  if (m < 1) {
    out.push_back("m must be >= 1");
    return report;
  }
  if (params.b.size() != m) out.push_back("b has wrong dimension");
  if (params.beta.rows() != m || params.beta.cols() != m)
    out.push_back("beta has wrong dimensions");
  if (params.sigma.size() != m) out.push_back("sigma has wrong dimension");
  if (params.alpha.size() != m) out.push_back("alpha has wrong dimension");
  if (!report.ok()) return report;

  for (int k = 0; k < m; ++k) {
    if (!(params.b[k] >= 0.0))
      out.push_back("b[" + std::to_string(k) + "] < 0");
    if (!(params.sigma[k] > 0.0))
      out.push_back("sigma[" + std::to_string(k) + "] <= 0");
    if (!(params.alpha[k] > 1.0 && params.alpha[k] < 2.0))
      out.push_back("alpha[" + std::to_string(k) + "] not in (1,2)");
    for (int j = 0; j < m; ++j) {
      if (k != j && !(params.beta(k, j) >= 0.0))
        out.push_back("beta[" + std::to_string(k) + "][" + std::to_string(j) +
                      "] < 0");
    }
  }
  validate_levy(params.levy, m, "levy", out);
  return report;
}

void require_valid(const ModelParams& params) {
  const auto report = validate(params);
  if (report.ok()) return;
  std::ostringstream msg;
  msg << "invalid model parameters:";
  for (const auto& v : report.violations) msg << "\n  - " << v;
  throw std::invalid_argument(msg.str());
}

// ---------------------------------------------------------------------------
// Stable axis integrals
// ---------------------------------------------------------------------------

namespace {

void require_left_halfplane(const Eigen::VectorXcd& u) {
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (u[j].real() > 1e-12)
      throw std::domain_error(
          "levy_exp_integral: Re(u) must be <= 0 componentwise");
  }
}

// Int_0^inf (e^{uz} - 1) z^{-1-theta} dz = -Gamma(1-theta)/theta (-u)^theta.
C stable_axis_full(C u, double theta) {
  if (u == C(0.0, 0.0)) return 0.0;
  const double coeff = boost::math::tgamma(1.0 - theta) / theta;
  return -coeff * std::pow(-u, theta);
}

// Int_0^r (e^{uz} - 1) z^{-1-theta} dz.
C stable_axis_truncated(C u, double theta, double r) {
  if (u == C(0.0, 0.0)) return 0.0;
  const double ur = std::abs(u) * r;
  if (ur <= 2.0) {
    // Power series sum_{n>=1} u^n r^{n-theta} / (n! (n-theta)).
    C term(1.0, 0.0);
    C sum(0.0, 0.0);
    const double rt = std::pow(r, -theta);
    for (int n = 1; n <= 80; ++n) {
      term *= u * r / static_cast<double>(n);
      const C inc = term * (rt / (static_cast<double>(n) - theta));
      sum += inc;
      if (std::abs(inc) < 1e-17 * (1.0 + std::abs(sum))) break;
    }
    return sum;
  }
  const double coeff = boost::math::tgamma(1.0 - theta) / theta;
  const C pw = std::pow(-u, theta);
  return -coeff * pw - pw * upper_incomplete_gamma(-theta, -u * r) +
         std::pow(r, -theta) / theta;
}

C cp_jump_transform(const JumpDist& jump, const Eigen::VectorXcd& u) {
  switch (jump.kind) {
    case JumpDist::Kind::Dirac: {
      C dot(0.0, 0.0);
      for (Eigen::Index k = 0; k < u.size(); ++k) dot += u[k] * jump.value[k];
      return std::exp(dot);
    }
    case JumpDist::Kind::Exponential: {
      C prod(1.0, 0.0);
      for (Eigen::Index k = 0; k < u.size(); ++k)
        prod /= (C(1.0, 0.0) - jump.value[k] * u[k]);
      return prod;
    }
    case JumpDist::Kind::Custom:
      throw std::runtime_error(
          "levy_exp_integral: compound-Poisson jump law is only available as "
          "a sampler (unsupported variant)");
  }
  return 0.0;
}

C exp_integral_impl(const LevyMeasureSpec& spec, const Eigen::VectorXcd& u,
                    double radius /* inf if untruncated */) {
  const bool truncated = std::isfinite(radius);
  return std::visit(
      [&](const auto& lv) -> C {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          C sum(0.0, 0.0);
          for (Eigen::Index k = 0; k < u.size(); ++k) {
            if (lv.weight[k] == 0.0) continue;
            sum += lv.weight[k] *
                   (truncated ? stable_axis_truncated(u[k], lv.theta[k], radius)
                              : stable_axis_full(u[k], lv.theta[k]));
          }
          return sum;
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          C sum(0.0, 0.0);
          for (const auto& [dir, mass] : lv.atoms) {
            if (mass == 0.0) continue;
            C dot(0.0, 0.0);
            for (Eigen::Index k = 0; k < u.size(); ++k) dot += u[k] * dir[k];
            sum += mass * (truncated
                               ? stable_axis_truncated(dot, lv.theta, radius)
                               : stable_axis_full(dot, lv.theta));
          }
          return sum;
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          C sum(0.0, 0.0);
          for (Eigen::Index k = 0; k < u.size(); ++k) {
            const double theta = lv.theta[k];
            const auto& g = lv.g[k];
            const C uk = u[k];
            if (uk == C(0.0, 0.0)) continue;
            switch (g.kind) {
              case TemperingFn::Kind::Constant:
                sum += g.c * (truncated
                                  ? stable_axis_truncated(uk, theta, radius)
                                  : stable_axis_full(uk, theta));
                break;
              case TemperingFn::Kind::Exponential:
                // (e^{uz}-1) c e^{-az} = c (e^{(u-a)z}-1) - c (e^{-az}-1)
                if (truncated) {
                  sum += g.c * (stable_axis_truncated(uk - g.a, theta, radius) -
                                stable_axis_truncated(C(-g.a, 0.0), theta,
                                                      radius));
                } else {
                  sum += g.c * (stable_axis_full(uk - g.a, theta) -
                                stable_axis_full(C(-g.a, 0.0), theta));
                }
                break;
              case TemperingFn::Kind::Custom: {
                auto integrand = [&](double z) -> C {
                  return (std::exp(uk * z) - 1.0) * g.custom(z) *
                         std::pow(z, -1.0 - theta);
                };
                if (truncated) {
                  sum += integrate_complex(integrand, 0.0, radius, 1e-10);
                } else {
                  sum += integrate_complex(integrand, 0.0, 1.0, 1e-10);
                  const double re = integrate_to_inf(
                      [&](double z) { return integrand(z).real(); }, 1.0);
                  const double im = integrate_to_inf(
                      [&](double z) { return integrand(z).imag(); }, 1.0);
                  sum += C(re, im);
                }
                break;
              }
            }
          }
          return sum;
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          const double r = truncated ? std::min(radius, lv.radius) : lv.radius;
          return exp_integral_impl(*lv.inner, u, r);
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          if (!truncated) return lv.rate * (cp_jump_transform(lv.jump, u) - 1.0);
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac:
              if (lv.jump.value.norm() <= radius)
                return lv.rate * (cp_jump_transform(lv.jump, u) - 1.0);
              return 0.0;
            case JumpDist::Kind::Exponential: {
              if (u.size() != 1)
                throw std::runtime_error(
                    "levy_exp_integral: truncated exponential compound-Poisson "
                    "is only supported in dimension 1 (unsupported variant)");
              const double mean = lv.jump.value[0];
              const C uk = u[0];
              auto integrand = [&](double z) -> C {
                return (std::exp(uk * z) - 1.0) * std::exp(-z / mean) / mean;
              };
              return lv.rate * integrate_complex(integrand, 0.0, radius, 1e-11);
            }
            case JumpDist::Kind::Custom:
              throw std::runtime_error(
                  "levy_exp_integral: compound-Poisson jump law is only "
                  "available as a sampler (unsupported variant)");
          }
          return 0.0;
        }
      },
      spec.v);
}

}  // namespace

std::complex<double> levy_exp_integral(const LevyMeasureSpec& spec,
                                       const Eigen::VectorXcd& u) {
  require_left_halfplane(u);
  return exp_integral_impl(spec, u, std::numeric_limits<double>::infinity());
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd levy_mean_impl(const LevyMeasureSpec& spec, int m,
                               double radius) {
  const bool truncated = std::isfinite(radius);
  return std::visit(
      [&](const auto& lv) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(lv)>;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
        if constexpr (std::is_same_v<T, LevyZero>) {
          return mean;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          if (!truncated)
            throw std::runtime_error(
                "levy_mean: coordinate-stable tails z^{-1-theta} with theta<1 "
                "have no first moment; truncate or temper the measure");
          for (int k = 0; k < m; ++k)
            mean[k] = lv.weight[k] * std::pow(radius, 1.0 - lv.theta[k]) /
                      (1.0 - lv.theta[k]);
          return mean;
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          if (!truncated)
            throw std::runtime_error(
                "levy_mean: spherical stable measure has no first moment; "
                "truncate or temper the measure");
          const double radial =
              std::pow(radius, 1.0 - lv.theta) / (1.0 - lv.theta);
          for (const auto& [dir, mass] : lv.atoms) mean += mass * radial * dir;
          return mean;
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          for (int k = 0; k < m; ++k) {
            const double theta = lv.theta[k];
            const auto& g = lv.g[k];
            auto f = [&](double z) { return g(z) * std::pow(z, -theta); };
            if (truncated) {
              mean[k] = integrate(f, 0.0, radius, 1e-10);
            } else {
              if (!g.tail_first_moment_finite)
                throw std::runtime_error(
                    "levy_mean: tempered coordinate " + std::to_string(k) +
                    " does not declare a finite first moment");
              mean[k] = integrate(f, 0.0, 1.0, 1e-10) +
                        integrate_to_inf(f, 1.0, 1e-10);
            }
          }
          return mean;
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          const double r = truncated ? std::min(radius, lv.radius) : lv.radius;
          return levy_mean_impl(*lv.inner, m, r);
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac:
              if (!truncated || lv.jump.value.norm() <= radius)
                return lv.rate * lv.jump.value;
              return mean;
            case JumpDist::Kind::Exponential:
              if (!truncated) return lv.rate * lv.jump.value;
              if (m == 1) {
                const double mu = lv.jump.value[0];
                mean[0] = lv.rate * integrate(
                                        [&](double z) {
                                          return z * std::exp(-z / mu) / mu;
                                        },
                                        0.0, radius, 1e-12);
                return mean;
              }
              throw std::runtime_error(
                  "levy_mean: truncated exponential compound-Poisson is only "
                  "supported in dimension 1 (unsupported variant)");
            case JumpDist::Kind::Custom:
              throw std::runtime_error(
                  "levy_mean: custom compound-Poisson jump law has no "
                  "evaluable mean (unsupported variant)");
          }
          return mean;
        }
      },
      spec.v);
}

}  // namespace

Eigen::VectorXd levy_mean(const LevyMeasureSpec& spec, int m) {
  return levy_mean_impl(spec, m, std::numeric_limits<double>::infinity());
}

double levy_small_jump_l1(const LevyMeasureSpec& spec, int m, double eps) {
  if (eps <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& lv) -> double {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
          double sum = 0.0;
          for (int k = 0; k < m; ++k)
            sum += lv.weight[k] * std::pow(eps, 1.0 - lv.theta[k]) /
                   (1.0 - lv.theta[k]);
          return sum;
        } else if constexpr (std::is_same_v<T, LevySpherical>) {
          double total_mass = 0.0;
          for (const auto& [dir, mass] : lv.atoms) total_mass += mass;
          return total_mass * std::pow(eps, 1.0 - lv.theta) / (1.0 - lv.theta);
        } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
          double sum = 0.0;
          for (int k = 0; k < m; ++k) {
            const double theta = lv.theta[k];
            const auto& g = lv.g[k];
            sum += integrate(
                [&](double z) { return g(z) * std::pow(z, -theta); }, 0.0, eps,
                1e-10);
          }
          return sum;
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          return levy_small_jump_l1(*lv.inner, m, std::min(eps, lv.radius));
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac: {
              const double n = lv.jump.value.norm();
              return n <= eps ? lv.rate * n : 0.0;
            }
            case JumpDist::Kind::Exponential:
              if (m == 1) {
                const double mu = lv.jump.value[0];
                return lv.rate * integrate(
                                     [&](double z) {
                                       return z * std::exp(-z / mu) / mu;
                                     },
                                     0.0, eps, 1e-12);
              }
              throw std::runtime_error(
                  "levy_small_jump_l1: multivariate exponential "
                  "compound-Poisson unsupported");
            case JumpDist::Kind::Custom:
              throw std::runtime_error(
                  "levy_small_jump_l1: custom jump law unsupported");
          }
          return 0.0;
        }
      },
      spec.v);
}

// ---------------------------------------------------------------------------
// Immigration functional and condition (A)
// ---------------------------------------------------------------------------

namespace {

// Locates a compound-Poisson spec with a sampler-only jump law, together
// with the truncation radius in force (if any).
struct CustomCp {
  const LevyCompoundPoisson* cp = nullptr;
  double radius = std::numeric_limits<double>::infinity();
};

std::optional<CustomCp> find_custom_cp(const LevyMeasureSpec& spec,
                                       double radius) {
  if (const auto* cp = std::get_if<LevyCompoundPoisson>(&spec.v)) {
    if (cp->jump.kind == JumpDist::Kind::Custom) return CustomCp{cp, radius};
    return std::nullopt;
  }
  if (const auto* t = std::get_if<LevyTruncated>(&spec.v))
    return find_custom_cp(*t->inner, std::min(radius, t->radius));
  return std::nullopt;
}

}  // namespace

ImmigrationValue immigration_functional(const ModelParams& params, int k,
                                        double xi) {
  if (k < 0 || k >= params.m)
    throw std::invalid_argument("immigration_functional: coordinate out of range");
  if (xi < 0.0)
    throw std::invalid_argument("immigration_functional: xi must be >= 0");

  ImmigrationValue result;
  if (const auto custom = find_custom_cp(params.levy,
                                         std::numeric_limits<double>::infinity())) {
    // Monte-Carlo fallback: rate * E[(1 - e^{-xi J_k}) 1_{|J| <= radius}].
    const auto& cp = *custom->cp;
    constexpr std::size_t kSamples = 200000;
    RngStream rng(0x696d6d69ULL, static_cast<std::uint64_t>(k));
    std::vector<double> vals;
    vals.reserve(kSamples);
    for (std::size_t i = 0; i < kSamples; ++i) {
      const Eigen::VectorXd j = cp.jump.sampler(rng);
      double v = 0.0;
      if (j.norm() <= custom->radius) v = 1.0 - std::exp(-xi * j[k]);
      vals.push_back(cp.rate * v);
    }
    result.value = params.b[k] * xi + mean(vals);
    result.standard_error = standard_error(vals);
    result.exact = false;
    return result;
  }

  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(params.m);
  u[k] = C(-xi, 0.0);
  result.value = params.b[k] * xi - levy_exp_integral(params.levy, u).real();
  return result;
}

ConditionAReport check_condition_a(const ModelParams& params,
                                   std::span<const double> xi_grid) {
  if (xi_grid.size() < 8)
    throw std::invalid_argument("check_condition_a: need at least 8 probe points");
  for (std::size_t i = 1; i < xi_grid.size(); ++i)
    if (!(xi_grid[i] > xi_grid[i - 1]))
      throw std::invalid_argument("check_condition_a: xi_grid must be increasing");
  if (!(xi_grid.front() > 0.0) || xi_grid.back() / xi_grid.front() < 100.0)
    throw std::invalid_argument(
        "check_condition_a: xi_grid must span at least two decades");

  ConditionAReport report;
  report.overall = true;
  // The condition is asymptotic ("for all xi >= M"), so fit only on the
  // upper half of the probe grid.
  const std::size_t lo = xi_grid.size() / 2;
  for (int k = 0; k < params.m; ++k) {
    std::vector<double> lx, ly;
    bool all_zero = true;
    for (std::size_t i = lo; i < xi_grid.size(); ++i) {
      const double v = immigration_functional(params, k, xi_grid[i]).value;
      if (v > 0.0) {
        all_zero = false;
        lx.push_back(std::log(xi_grid[i]));
        ly.push_back(std::log(v));
      }
    }
    if (all_zero)
      throw std::runtime_error(
          "check_condition_a: immigration functional vanishes identically on "
          "the probe grid for coordinate " +
          std::to_string(k));
    const auto fit = fit_line(lx, ly);
    ConditionAReport::Coordinate coord;
    coord.vartheta_fit = fit.slope;
    coord.c_fit = std::exp(fit.intercept);
    coord.m_used = xi_grid[lo];
    coord.satisfied =
        coord.vartheta_fit > params.alpha[k] - 1.0 - kConditionASlopeTolerance &&
        coord.c_fit > 0.0;
    report.overall = report.overall && coord.satisfied;
    report.per_coordinate.push_back(coord);
  }
  return report;
}

bool is_subcritical(const Eigen::MatrixXd& beta) {
  if (beta.rows() != beta.cols())
    throw std::invalid_argument("is_subcritical: beta must be square");
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(beta);
  return solver.eigenvalues().real().maxCoeff() < -1e-10;
}

bool log_moment_holds(const LevyMeasureSpec& spec) {
  return std::visit(
      [&](const auto& lv) -> bool {
        using T = std::decay_t<decltype(lv)>;
        if constexpr (std::is_same_v<T, LevyZero>) {
          return true;
        } else if constexpr (std::is_same_v<T, LevyCoordinateStable> ||
                             std::is_same_v<T, LevySpherical> ||
                             std::is_same_v<T, LevyTemperedCoordinate>) {
          // Polynomial tails z^{-1-theta} with theta > 0 (g bounded for the
          // tempered family) integrate log(1+z) at infinity.
          return true;
        } else if constexpr (std::is_same_v<T, LevyTruncated>) {
          return true;  // no jumps beyond the radius
        } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
          switch (lv.jump.kind) {
            case JumpDist::Kind::Dirac:
            case JumpDist::Kind::Exponential:
              return true;
            case JumpDist::Kind::Custom:
              if (lv.jump.has_log_moment.has_value())
                return *lv.jump.has_log_moment;
              throw std::runtime_error(
                  "log_moment_holds: custom jump law lacks moment metadata");
          }
          return false;
        }
      },
      spec.v);
}

}  // namespace ajcir
