#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>

#include "ajcir/model.hpp"
#include "ajcir/quad.hpp"

using namespace ajcir;
using C = std::complex<double>;

namespace {

ModelParams simple_1d(LevyMeasureSpec levy, double b = 0.0) {
  ModelParams p;
  p.m = 1;
  p.b = Eigen::VectorXd::Constant(1, b);
  p.beta = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.sigma = Eigen::VectorXd::Ones(1);
  p.alpha = Eigen::VectorXd::Constant(1, 1.5);
  p.levy = std::move(levy);
  return p;
}

LevyMeasureSpec coord_stable_1d(double theta, double w) {
  return LevyMeasureSpec{LevyCoordinateStable{
      Eigen::VectorXd::Constant(1, theta), Eigen::VectorXd::Constant(1, w)}};
}

}  // namespace

TEST_CASE("validate flags every admissibility violation") {
  ModelParams ok = simple_1d(LevyMeasureSpec{LevyZero{}});
  CHECK(validate(ok).ok());

  ModelParams bad_alpha = ok;
  bad_alpha.alpha[0] = 2.0;
  auto rep = validate(bad_alpha);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].find("alpha[0] not in (1,2)") != std::string::npos);

  ModelParams bad_beta;
  bad_beta.m = 2;
  bad_beta.b = Eigen::VectorXd::Zero(2);
  bad_beta.beta = (Eigen::MatrixXd(2, 2) << -1.0, -0.1, 0.0, -1.0).finished();
  bad_beta.sigma = Eigen::VectorXd::Ones(2);
  bad_beta.alpha = Eigen::VectorXd::Constant(2, 1.5);
  bad_beta.levy = LevyMeasureSpec{LevyZero{}};
  rep = validate(bad_beta);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations[0].find("beta[0][1] < 0") != std::string::npos);

  ModelParams bad_sigma = ok;
  bad_sigma.sigma[0] = 0.0;
  CHECK_FALSE(validate(bad_sigma).ok());

  ModelParams bad_theta = simple_1d(coord_stable_1d(1.0, 1.0));
  CHECK_FALSE(validate(bad_theta).ok());
  CHECK_THROWS_AS(require_valid(bad_theta), std::invalid_argument);
}

TEST_CASE("immigration functional: drift only") {
  ModelParams p;
  p.m = 2;
  p.b = (Eigen::VectorXd(2) << 2.0, 0.0).finished();
  p.beta = -Eigen::MatrixXd::Identity(2, 2);
  p.sigma = Eigen::VectorXd::Ones(2);
  p.alpha = Eigen::VectorXd::Constant(2, 1.5);
  p.levy = LevyMeasureSpec{LevyZero{}};
  CHECK(immigration_functional(p, 0, 3.0).value == doctest::Approx(6.0));
  CHECK(immigration_functional(p, 1, 3.0).value == doctest::Approx(0.0));
}

TEST_CASE("immigration functional: coordinate-stable closed form vs quadrature") {
  auto p = simple_1d(coord_stable_1d(0.5, 1.0));
  // xi = 4: closed form 4^{0.5} Gamma(0.5)/0.5 = 2 * 2 * sqrt(pi)
  const double expect = 4.0 * std::sqrt(std::numbers::pi);
  CHECK(immigration_functional(p, 0, 4.0).value ==
        doctest::Approx(expect).epsilon(1e-12));
  // quadrature oracle across a grid of xi and theta
  for (double theta : {0.3, 0.5, 0.8}) {
    auto q = simple_1d(coord_stable_1d(theta, 1.3));
    for (double xi : {1e-2, 1.0, 37.0, 1e4}) {
      const double oracle =
          1.3 * (integrate(
                     [&](double z) {
                       return (1.0 - std::exp(-xi * z)) * std::pow(z, -theta) /
                              z;
                     },
                     0.0, 1.0, 1e-12) +
                 integrate_to_inf(
                     [&](double z) {
                       return (1.0 - std::exp(-xi * z)) *
                              std::pow(z, -1.0 - theta);
                     },
                     1.0, 1e-12));
      CHECK(immigration_functional(q, 0, xi).value ==
            doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("immigration functional: spherical atom with zero component") {
  ModelParams p;
  p.m = 3;
  p.b = Eigen::VectorXd::Zero(3);
  p.beta = -Eigen::MatrixXd::Identity(3, 3);
  p.sigma = Eigen::VectorXd::Ones(3);
  p.alpha = Eigen::VectorXd::Constant(3, 1.5);
  LevySpherical sp;
  sp.theta = 0.6;
  sp.atoms.emplace_back(Eigen::VectorXd::Unit(3, 0), 1.0);  // e_1 only
  p.levy = LevyMeasureSpec{sp};
  // coordinate 3 sees sigma_k = 0 in the only atom
  for (double xi : {0.5, 2.0, 50.0})
    CHECK(immigration_functional(p, 2, xi).value == doctest::Approx(0.0));
  // coordinate 1 matches the 1d closed form
  const double expect = std::pow(7.0, 0.6) *
                        boost::math::tgamma(0.4) / 0.6;
  CHECK(immigration_functional(p, 0, 7.0).value ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("immigration functional is nondecreasing and vanishes at 0") {
  const auto specs = {coord_stable_1d(0.5, 1.0),
                      truncate_levy(coord_stable_1d(0.7, 2.0), 1.5),
                      LevyMeasureSpec{LevyCompoundPoisson{
                          2.0, {JumpDist::Kind::Dirac,
                                Eigen::VectorXd::Constant(1, 0.3),
                                {}, {}, {}}}}};
  for (const auto& levy : specs) {
    auto p = simple_1d(levy, 0.1);
    double prev = immigration_functional(p, 0, 0.0).value;
    CHECK(prev == doctest::Approx(0.0));
    for (double xi : {0.1, 1.0, 5.0, 20.0, 100.0}) {
      const double v = immigration_functional(p, 0, xi).value;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("monte-carlo fallback for sampler-only jump laws") {
  LevyCompoundPoisson cp;
  cp.rate = 2.0;
  cp.jump.kind = JumpDist::Kind::Custom;
  cp.jump.sampler = [](RngStream& rng) {
    return Eigen::VectorXd::Constant(1, 0.5 + 0.1 * rng.uniform());
  };
  cp.jump.has_log_moment = true;
  auto p = simple_1d(LevyMeasureSpec{cp});
  const auto r = immigration_functional(p, 0, 2.0);
  CHECK_FALSE(r.exact);
  CHECK(r.standard_error > 0.0);
  // rate * E[1 - e^{-2 J}] with J ~ U(0.5, 0.6)
  const double oracle = 2.0 * integrate(
                                  [](double u) {
                                    return 1.0 - std::exp(-2.0 * (0.5 + 0.1 * u));
                                  },
                                  0.0, 1.0, 1e-12);
  CHECK(std::abs(r.value - oracle) < 6.0 * r.standard_error);
}

TEST_CASE("condition (A): positive drift dominates") {
  auto p = simple_1d(coord_stable_1d(0.5, 0.001), 1.0);
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(std::pow(10.0, 4.0 * i / 15.0));
  const auto rep = check_condition_a(p, grid);
  CHECK(rep.per_coordinate[0].vartheta_fit == doctest::Approx(1.0).epsilon(0.02));
  CHECK(rep.per_coordinate[0].satisfied);
  CHECK(rep.overall);
}

TEST_CASE("condition (A): pure stable immigration recovers theta") {
  for (double theta : {0.6, 0.8}) {
    auto p = simple_1d(coord_stable_1d(theta, 1.0), 0.0);
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i) grid.push_back(std::pow(10.0, 4.0 * i / 15.0));
    const auto rep = check_condition_a(p, grid);
    CHECK(std::abs(rep.per_coordinate[0].vartheta_fit - theta) < 0.02);
    CHECK(rep.per_coordinate[0].satisfied);  // theta > alpha - 1 = 0.5
  }
}

TEST_CASE("condition (A): degenerate when the functional vanishes") {
  auto p = simple_1d(LevyMeasureSpec{LevyZero{}}, 0.0);
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(std::pow(10.0, 4.0 * i / 15.0));
  CHECK_THROWS_AS(check_condition_a(p, grid), std::runtime_error);
}

TEST_CASE("condition (A): probe grid preconditions") {
  auto p = simple_1d(coord_stable_1d(0.5, 1.0));
  std::vector<double> too_few{1, 2, 3, 4, 5, 6, 7};
  CHECK_THROWS_AS(check_condition_a(p, too_few), std::invalid_argument);
  std::vector<double> narrow{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK_THROWS_AS(check_condition_a(p, narrow), std::invalid_argument);
}

TEST_CASE("subcriticality") {
  CHECK(is_subcritical((Eigen::MatrixXd(2, 2) << -1, 0, 0, -2).finished()));
  CHECK_FALSE(is_subcritical(Eigen::MatrixXd::Zero(1, 1)));
  // eigenvalues -1 +- 1 -> max is 0
  CHECK_FALSE(
      is_subcritical((Eigen::MatrixXd(2, 2) << -1, 2, 0.5, -1).finished()));
}

TEST_CASE("log-moment condition") {
  CHECK(log_moment_holds(LevyMeasureSpec{LevyZero{}}));
  CHECK(log_moment_holds(coord_stable_1d(0.5, 1.0)));
  CHECK(log_moment_holds(truncate_levy(coord_stable_1d(0.5, 1.0), 1.0)));
  LevyCompoundPoisson cp;
  cp.jump.kind = JumpDist::Kind::Custom;
  cp.jump.sampler = [](RngStream&) { return Eigen::VectorXd::Ones(1); };
  CHECK_THROWS_AS(log_moment_holds(LevyMeasureSpec{cp}), std::runtime_error);
  cp.jump.has_log_moment = true;
  CHECK(log_moment_holds(LevyMeasureSpec{cp}));
}

TEST_CASE("levy mean: stable tails have none, truncation restores it") {
  CHECK_THROWS_AS(levy_mean(coord_stable_1d(0.5, 1.0), 1), std::runtime_error);
  const auto trunc = truncate_levy(coord_stable_1d(0.5, 2.0), 3.0);
  // Int_0^3 z * 2 z^{-1.5} dz = 2 * 2 * sqrt(3)
  CHECK(levy_mean(trunc, 1)[0] ==
        doctest::Approx(4.0 * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("levy_exp_integral closed forms against quadrature") {
  const C u(-1.2, 0.8);
  SUBCASE("coordinate stable") {
    const auto spec = coord_stable_1d(0.6, 1.5);
    Eigen::VectorXcd uv(1);
    uv << u;
    const C got = levy_exp_integral(spec, uv);
    // Tail of the constant part taken analytically: Int_1^inf z^{-1.6} = 1/0.6.
    const C oracle =
        1.5 * (integrate_complex(
                   [&](double z) {
                     return (std::exp(u * z) - 1.0) * std::pow(z, -1.6);
                   },
                   0.0, 1.0, 1e-12) +
               integrate_complex(
                   [&](double z) { return std::exp(u * z) * std::pow(z, -1.6); },
                   1.0, 80.0, 1e-12) -
               C(1.0 / 0.6, 0.0));
    CHECK(std::abs(got - oracle) < 1e-8);
  }
  SUBCASE("truncated coordinate stable") {
    const auto spec = truncate_levy(coord_stable_1d(0.6, 1.5), 2.5);
    Eigen::VectorXcd uv(1);
    uv << u;
    const C got = levy_exp_integral(spec, uv);
    const C oracle = 1.5 * integrate_complex(
                               [&](double z) {
                                 return (std::exp(u * z) - 1.0) *
                                        std::pow(z, -1.6);
                               },
                               0.0, 2.5, 1e-12);
    CHECK(std::abs(got - oracle) < 1e-8);
    // large |u| exercises the incomplete-gamma branch
    Eigen::VectorXcd ub(1);
    ub << C(-30.0, 17.0);
    const C got_b = levy_exp_integral(spec, ub);
    const C oracle_b = 1.5 * integrate_complex(
                                 [&](double z) {
                                   return (std::exp(ub[0] * z) - 1.0) *
                                          std::pow(z, -1.6);
                                 },
                                 0.0, 2.5, 1e-12);
    CHECK(std::abs(got_b - oracle_b) < 1e-8 * (1.0 + std::abs(got_b)));
  }
  SUBCASE("tempered exponential") {
    LevyTemperedCoordinate tc;
    tc.theta = Eigen::VectorXd::Constant(1, 0.4);
    TemperingFn g;
    g.kind = TemperingFn::Kind::Exponential;
    g.c = 0.7;
    g.a = 1.3;
    g.sup_bound = 0.7;
    tc.g.push_back(g);
    Eigen::VectorXcd uv(1);
    uv << u;
    const C got = levy_exp_integral(LevyMeasureSpec{tc}, uv);
    const C oracle = integrate_complex(
                         [&](double z) {
                           return (std::exp(u * z) - 1.0) * 0.7 *
                                  std::exp(-1.3 * z) * std::pow(z, -1.4);
                         },
                         0.0, 1.0, 1e-12) +
                     integrate_complex(
                         [&](double z) {
                           return (std::exp(u * z) - 1.0) * 0.7 *
                                  std::exp(-1.3 * z) * std::pow(z, -1.4);
                         },
                         1.0, 60.0, 1e-12);
    CHECK(std::abs(got - oracle) < 1e-8);
  }
  SUBCASE("compound poisson, exponential jumps") {
    LevyCompoundPoisson cp;
    cp.rate = 1.7;
    cp.jump.kind = JumpDist::Kind::Exponential;
    cp.jump.value = Eigen::VectorXd::Constant(1, 0.8);
    Eigen::VectorXcd uv(1);
    uv << u;
    const C got = levy_exp_integral(LevyMeasureSpec{cp}, uv);
    const C oracle = 1.7 * (1.0 / (1.0 - 0.8 * u) - 1.0);
    CHECK(std::abs(got - oracle) < 1e-12);
  }
  SUBCASE("branch guard") {
    const auto spec = coord_stable_1d(0.6, 1.5);
    Eigen::VectorXcd bad(1);
    bad << C(1e-6, 0.0);
    CHECK_THROWS_AS(levy_exp_integral(spec, bad), std::domain_error);
  }
}

TEST_CASE("uniform sphere atoms are unit directions with the right mass") {
  for (int m : {1, 2, 3}) {
    const auto atoms = uniform_sphere_atoms(m, m == 1 ? 1 : 64, 2.0);
    double mass = 0.0;
    for (const auto& [dir, w] : atoms) {
      CHECK(dir.size() == m);
      CHECK(dir.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((dir.array() >= 0.0).all());
      mass += w;
    }
    CHECK(mass == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(uniform_sphere_atoms(4, 64), std::invalid_argument);
}

TEST_CASE("small-jump l1 mass") {
  const auto spec = coord_stable_1d(0.5, 2.0);
  // Int_0^eps z * 2 z^{-1.5} dz = 4 sqrt(eps)
  CHECK(levy_small_jump_l1(spec, 1, 0.01) ==
        doctest::Approx(0.4).epsilon(1e-12));
  CHECK(levy_small_jump_l1(truncate_levy(spec, 0.001), 1, 0.01) ==
        doctest::Approx(4.0 * std::sqrt(0.001)).epsilon(1e-12));
}
