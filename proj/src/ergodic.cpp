#include "ajcir/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ajcir/levy_rng.hpp"
#include "ajcir/quad.hpp"
#include "ajcir/simulator.hpp"
#include "ajcir/stats.hpp"

namespace ajcir {

// ---------------------------------------------------------------------------
// Lyapunov machinery
// ---------------------------------------------------------------------------

LyapunovData solve_M(const Eigen::MatrixXd& beta) {
  if (!is_subcritical(beta))
    throw std::runtime_error("solve_M: beta is not subcritical");
  const int m = static_cast<int>(beta.rows());
  const int n_sym = m * (m + 1) / 2;
  auto sym_index = [m](int i, int j) {
    if (i > j) std::swap(i, j);
    return i * m - i * (i - 1) / 2 + (j - i);
  };
  (void)m;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_sym, n_sym);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_sym);
  // Equation (p,q), p <= q:  sum_k M_{pk} beta_{kq} + beta_{kp} M_{kq} = -d_pq.
  for (int p = 0; p < m; ++p) {
    for (int q = p; q < m; ++q) {
      const int row = sym_index(p, q);
      for (int k = 0; k < m; ++k) {
        A(row, sym_index(p, k)) += beta(k, q);
        A(row, sym_index(k, q)) += beta(k, p);
      }
      rhs[row] = (p == q) ? -1.0 : 0.0;
    }
  }
  const Eigen::VectorXd v = A.colPivHouseholderQr().solve(rhs);

  LyapunovData out;
  out.M = Eigen::MatrixXd(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) out.M(i, j) = out.M(j, i) = v[sym_index(i, j)];

  out.residual = (out.M * beta + beta.transpose() * out.M +
                  Eigen::MatrixXd::Identity(m, m))
                     .norm();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.M);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("solve_M: computed M is not positive definite");
  out.c_star = std::sqrt(es.eigenvalues().minCoeff());
  out.c_superstar = std::sqrt(es.eigenvalues().maxCoeff());
  return out;
}

double V_value(const Eigen::VectorXd& x, const LyapunovData& lyap) {
  return std::sqrt(1.0 + x.dot(lyap.M * x));
}

namespace {

// (V(x + r dir) - V(x)) without cancellation:
// (V1^2 - V0^2) / (V1 + V0) with V1^2 = V0^2 + 2 r <Mx,dir> + r^2 dir'Mdir.
struct ShiftedV {
  double v0, mx_dir, dir_m_dir;
  double diff(double r) const {
    const double v1sq = v0 * v0 + 2.0 * r * mx_dir + r * r * dir_m_dir;
    const double v1 = std::sqrt(std::max(v1sq, 1.0));
    return (2.0 * r * mx_dir + r * r * dir_m_dir) / (v1 + v0);
  }
  // diff(r) / r, finite down to r = 0.
  double diff_over_r(double r) const {
    const double v1sq = v0 * v0 + 2.0 * r * mx_dir + r * r * dir_m_dir;
    const double v1 = std::sqrt(std::max(v1sq, 1.0));
    return (2.0 * mx_dir + r * dir_m_dir) / (v1 + v0);
  }
};

}  // namespace

double generator_on_V(const ModelParams& params, const Eigen::VectorXd& x,
                      const LyapunovData& lyap, double quad_tol) {
  if (x.size() != params.m)
    throw std::invalid_argument("generator_on_V: x has wrong dimension");
  if ((x.array() < 0.0).any())
    throw std::invalid_argument("generator_on_V: x must be nonnegative");
  const auto* trunc = std::get_if<LevyTruncated>(&params.levy.v);
  if (!params.levy.is_zero() && trunc == nullptr)
    throw std::invalid_argument(
        "generator_on_V: nu must be of Truncated type (the small-jump part)");

  const int m = params.m;
  const double v0 = V_value(x, lyap);
  const Eigen::VectorXd mx = lyap.M * x;

  // Drift term <b + beta x, grad V> = <b + beta x, Mx> / V.
  double total = (params.b + params.beta * x).dot(mx) / v0;

  // State-independent jump part over {|z| <= radius}.
  if (trunc != nullptr) {
    const double radius = trunc->radius;
    auto axis_term = [&](const Eigen::VectorXd& dir, double theta,
                         const TemperingFn* g) {
      const ShiftedV sv{v0, mx.dot(dir), dir.dot(lyap.M * dir)};
      // diff(r) r^{-1-theta} = (diff(r)/r) r^{-theta}, finite at 0.
      return integrate(
          [&](double r) {
            const double gv = g ? (*g)(r) : 1.0;
            return sv.diff_over_r(r) * gv * std::pow(r, -theta);
          },
          0.0, radius, quad_tol);
    };
    std::visit(
        [&](const auto& lv) {
          using T = std::decay_t<decltype(lv)>;
          if constexpr (std::is_same_v<T, LevyZero>) {
          } else if constexpr (std::is_same_v<T, LevyCoordinateStable>) {
            for (int k = 0; k < m; ++k)
              if (lv.weight[k] > 0.0)
                total += lv.weight[k] *
                         axis_term(Eigen::VectorXd::Unit(m, k), lv.theta[k],
                                   nullptr);
          } else if constexpr (std::is_same_v<T, LevySpherical>) {
            for (const auto& [dir, mass] : lv.atoms)
              if (mass > 0.0) total += mass * axis_term(dir, lv.theta, nullptr);
          } else if constexpr (std::is_same_v<T, LevyTemperedCoordinate>) {
            for (int k = 0; k < m; ++k)
              total += axis_term(Eigen::VectorXd::Unit(m, k), lv.theta[k],
                                 &lv.g[k]);
          } else if constexpr (std::is_same_v<T, LevyCompoundPoisson>) {
            const double radius = trunc->radius;
            switch (lv.jump.kind) {
              case JumpDist::Kind::Dirac: {
                if (lv.jump.value.norm() <= radius) {
                  Eigen::VectorXd xz = x + lv.jump.value;
                  total += lv.rate * (V_value(xz, lyap) - v0);
                }
                break;
              }
              case JumpDist::Kind::Exponential: {
                if (m != 1)
                  throw std::runtime_error(
                      "generator_on_V: multivariate exponential "
                      "compound-Poisson unsupported");
                const double mu = lv.jump.value[0];
                const ShiftedV sv{v0, mx[0], lyap.M(0, 0)};
                total += lv.rate * integrate(
                                       [&](double r) {
                                         return sv.diff(r) *
                                                std::exp(-r / mu) / mu;
                                       },
                                       0.0, radius, quad_tol);
                break;
              }
              case JumpDist::Kind::Custom:
                throw std::runtime_error(
                    "generator_on_V: custom jump law unsupported");
            }
          } else if constexpr (std::is_same_v<T, LevyTruncated>) {
            throw std::runtime_error(
                "generator_on_V: nested truncation unsupported");
          }
        },
        trunc->inner->v);
  }

  // Compensated stable terms sigma_j x_j Int (V(x+e_j z) - V - z dV_j) mu_j.
  // The integrand reduces exactly to z^2 (M_jj - d^2) / (V1 + V0 + z d).
  for (int j = 0; j < m; ++j) {
    if (params.sigma[j] * x[j] == 0.0) continue;
    const double d = mx[j] / v0;
    const double mjj = lyap.M(j, j);
    const double alpha = params.alpha[j];
    // Head: z^2 z^{-1-alpha} = z^{1-alpha}, finite quotient.
    double integral = integrate(
        [&](double z) {
          const double v1 =
              std::sqrt(std::max(v0 * v0 + 2.0 * z * mx[j] + z * z * mjj, 1.0));
          return std::pow(z, 1.0 - alpha) * (mjj - d * d) / (v1 + v0 + z * d);
        },
        0.0, 1.0, quad_tol);
    // Tail via w = 1/z, quotient scaled by w to stay finite as w -> 0.
    integral += integrate(
        [&](double w) {
          const double wv1 =
              std::sqrt(std::max(w * w * v0 * v0 + 2.0 * w * mx[j] + mjj, 0.0));
          return std::pow(w, alpha - 2.0) * (mjj - d * d) /
                 (wv1 + w * v0 + d);
        },
        0.0, 1.0, quad_tol);
    total += params.sigma[j] * x[j] * integral / c_alpha(alpha);
  }
  return total;
}

DriftCertificate drift_certificate(const ModelParams& params,
                                   const LyapunovData& lyap, double radius_max,
                                   int n_radii) {
  const int m = params.m;
  DriftCertificate cert;
  // Evaluation rays: coordinate axes plus the diagonal.
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < m; ++k) dirs.push_back(Eigen::VectorXd::Unit(m, k));
  dirs.push_back(Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m))));

  cert.grid.push_back(Eigen::VectorXd::Zero(m));
  for (int i = 0; i < n_radii; ++i) {
    const double r =
        radius_max * std::pow(10.0, -3.0 * (n_radii - 1 - i) / (n_radii - 1.0));
    for (const auto& dir : dirs) cert.grid.push_back(r * dir);
  }
  std::vector<double> v_vals;
  for (const auto& xp : cert.grid) {
    cert.l0v.push_back(generator_on_V(params, xp, lyap));
    v_vals.push_back(V_value(xp, lyap));
  }

  // Largest c1 such that the binding point of c2(c1) = max(L0V + c1 V)
  // stays off the outer decade of the grid (so the certificate would
  // survive extending the grid).
  const double v_guard = *std::max_element(v_vals.begin(), v_vals.end()) / 10.0;
  auto binding_ok = [&](double c1) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cert.grid.size(); ++i) {
      const double s = cert.l0v[i] + c1 * v_vals[i];
      if (s > best) {
        best = s;
        arg = i;
      }
    }
    return v_vals[arg] < v_guard;
  };
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < cert.grid.size(); ++i)
    hi = std::max(hi, -cert.l0v[i] / v_vals[i]);
  if (!binding_ok(0.0)) {
    cert.ok = false;
    return cert;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binding_ok(mid))
      lo = mid;
    else
      hi = mid;
  }
  cert.c1 = lo;
  double c2 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cert.grid.size(); ++i)
    c2 = std::max(c2, cert.l0v[i] + cert.c1 * v_vals[i]);
  cert.c2 = std::max(c2, 0.0);
  cert.ok = cert.c1 > 0.0;
  return cert;
}

// ---------------------------------------------------------------------------
// Total variation
// ---------------------------------------------------------------------------

namespace {

// Per-axis quantile edges of the pooled cloud; bins_per_axis cells per axis.
std::vector<std::vector<double>> pooled_edges(const Eigen::MatrixXd& a,
                                              const Eigen::MatrixXd& b,
                                              int bins) {
  const int m = static_cast<int>(a.cols());
  std::vector<std::vector<double>> edges(m);
  for (int k = 0; k < m; ++k) {
    std::vector<double> col;
    col.reserve(a.rows() + b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) col.push_back(a(i, k));
    for (Eigen::Index i = 0; i < b.rows(); ++i) col.push_back(b(i, k));
    std::sort(col.begin(), col.end());
    for (int e = 1; e < bins; ++e) {
      const double q = static_cast<double>(e) / bins;
      edges[k].push_back(col[static_cast<std::size_t>(q * (col.size() - 1))]);
    }
  }
  return edges;
}

std::size_t cell_of(const Eigen::MatrixXd& pts, Eigen::Index row,
                    const std::vector<std::vector<double>>& edges, int bins) {
  std::size_t cell = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const double v = pts(row, static_cast<Eigen::Index>(k));
    const auto& e = edges[k];
    const std::size_t idx =
        static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), v) -
                                 e.begin());
    cell = cell * static_cast<std::size_t>(bins) + idx;
  }
  return cell;
}

double tv_from_cells(const std::vector<std::size_t>& ca,
                     const std::vector<std::size_t>& cb, std::size_t n_cells) {
  std::vector<double> ha(n_cells, 0.0), hb(n_cells, 0.0);
  for (auto c : ca) ha[c] += 1.0 / static_cast<double>(ca.size());
  for (auto c : cb) hb[c] += 1.0 / static_cast<double>(cb.size());
  double tv = 0.0;
  for (std::size_t c = 0; c < n_cells; ++c) tv += std::abs(ha[c] - hb[c]);
  return tv;
}

}  // namespace

TvDetails tv_distance_detailed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                               int bins_per_axis) {
  if (a.rows() == 0 || b.rows() == 0)
    throw std::invalid_argument("tv_distance: empty sample set");
  if (a.cols() != b.cols())
    throw std::invalid_argument("tv_distance: dimension mismatch");
  if (bins_per_axis < 2)
    throw std::invalid_argument("tv_distance: need >= 2 bins per axis");

  const int m = static_cast<int>(a.cols());
  const auto edges = pooled_edges(a, b, bins_per_axis);
  std::size_t n_cells = 1;
  for (int k = 0; k < m; ++k) n_cells *= static_cast<std::size_t>(bins_per_axis);

  std::vector<std::size_t> ca(a.rows()), cb(b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    ca[static_cast<std::size_t>(i)] = cell_of(a, i, edges, bins_per_axis);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    cb[static_cast<std::size_t>(i)] = cell_of(b, i, edges, bins_per_axis);

  TvDetails out;
  out.cells = n_cells;
  out.value = tv_from_cells(ca, cb, n_cells);
  return out;
}

double tv_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                   int bins_per_axis) {
  return tv_distance_detailed(a, b, bins_per_axis).value;
}

// ---------------------------------------------------------------------------
// Ergodicity experiment
// ---------------------------------------------------------------------------

ErgodicityReport ergodicity_experiment(const ModelParams& params,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& y,
                                       std::span<const double> t_grid,
                                       std::size_t n_paths,
                                       std::uint64_t master_seed, double dt,
                                       int bins_per_axis, int n_bootstrap,
                                       int n_threads) {
  if (t_grid.empty())
    throw std::invalid_argument("ergodicity_experiment: empty t_grid");
  const double T = t_grid.back();
  if (dt <= 0.0) dt = default_dt(T);

  const auto ens_x = simulate_ensemble(params, x, T, dt, n_paths, master_seed,
                                       KeepMode::Snapshots, t_grid, n_threads);
  const auto ens_y =
      simulate_ensemble(params, y, T, dt, n_paths, master_seed + 1,
                        KeepMode::Snapshots, t_grid, n_threads);

  ErgodicityReport report;
  const std::size_t n_t = t_grid.size();
  const std::size_t half = n_paths / 2;

  // Precompute cell assignments per time so bootstrap refits reuse them.
  std::vector<std::vector<std::size_t>> cells_x(n_t), cells_y(n_t);
  std::vector<std::size_t> n_cells(n_t);
  for (std::size_t s = 0; s < n_t; ++s) {
    const auto& a = ens_x.snapshots[s];
    const auto& b = ens_y.snapshots[s];
    const auto edges = pooled_edges(a, b, bins_per_axis);
    std::size_t nc = 1;
    for (int k = 0; k < params.m; ++k)
      nc *= static_cast<std::size_t>(bins_per_axis);
    n_cells[s] = nc;
    cells_x[s].resize(n_paths);
    cells_y[s].resize(n_paths);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      cells_x[s][static_cast<std::size_t>(i)] =
          cell_of(a, i, edges, bins_per_axis);
      cells_y[s][static_cast<std::size_t>(i)] =
          cell_of(b, i, edges, bins_per_axis);
    }

    DecayRow row;
    row.t = t_grid[s];
    row.tv = tv_from_cells(cells_x[s], cells_y[s], nc);
    // Self-distance floor from the two halves of the x-ensemble.
    std::vector<std::size_t> h1(cells_x[s].begin(), cells_x[s].begin() + half);
    std::vector<std::size_t> h2(cells_x[s].begin() + half, cells_x[s].end());
    row.floor = tv_from_cells(h1, h2, nc);
    report.rows.push_back(row);
  }

  auto fit_delta = [&](const std::vector<double>& tvs) -> double {
    std::vector<double> ft, fv;
    for (std::size_t s = 0; s < n_t; ++s) {
      if (tvs[s] > 2.0 * report.rows[s].floor && tvs[s] < 1.8) {
        ft.push_back(t_grid[s]);
        fv.push_back(std::log(tvs[s]));
      }
    }
    if (ft.size() < 3)
      throw std::runtime_error(
          "ergodicity_experiment: fewer than 3 usable TV points between the "
          "noise floor and saturation (degenerate fit)");
    return -fit_line(ft, fv).slope;
  };

  std::vector<double> tv0(n_t);
  for (std::size_t s = 0; s < n_t; ++s) {
    tv0[s] = report.rows[s].tv;
    report.rows[s].used_in_fit =
        tv0[s] > 2.0 * report.rows[s].floor && tv0[s] < 1.8;
    if (report.rows[s].used_in_fit) ++report.fit_points;
  }
  report.delta_hat = fit_delta(tv0);

  // Path-level bootstrap with the binning held fixed.
  std::vector<double> boots;
  std::vector<std::vector<double>> boot_tvs(n_t);
  RngStream rng(master_seed ^ 0xb00757aULL, 0);
  for (int bb = 0; bb < n_bootstrap; ++bb) {
    std::vector<std::size_t> ix(n_paths), iy(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
      ix[i] = static_cast<std::size_t>(rng.next_u64() % n_paths);
      iy[i] = static_cast<std::size_t>(rng.next_u64() % n_paths);
    }
    std::vector<double> tvs(n_t);
    for (std::size_t s = 0; s < n_t; ++s) {
      std::vector<std::size_t> ca(n_paths), cb(n_paths);
      for (std::size_t i = 0; i < n_paths; ++i) {
        ca[i] = cells_x[s][ix[i]];
        cb[i] = cells_y[s][iy[i]];
      }
      tvs[s] = tv_from_cells(ca, cb, n_cells[s]);
      boot_tvs[s].push_back(tvs[s]);
    }
    try {
      boots.push_back(fit_delta(tvs));
    } catch (const std::runtime_error&) {
      // skip degenerate resamples
    }
  }
  if (!boots.empty()) {
    report.ci_lo = quantile(boots, 0.025);
    report.ci_hi = quantile(boots, 0.975);
  }
  for (std::size_t s = 0; s < n_t; ++s) {
    if (!boot_tvs[s].empty()) {
      report.rows[s].ci_lo = quantile(boot_tvs[s], 0.025);
      report.rows[s].ci_hi = quantile(boot_tvs[s], 0.975);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Local Dobrushin probe
// ---------------------------------------------------------------------------

DobrushinReport dobrushin_check(const ModelParams& params, double R, double h,
                                std::size_t n_pairs, std::size_t n_paths,
                                std::uint64_t master_seed, double dt,
                                int bins_per_axis, int n_threads) {
  if (!(h > 0.0)) throw std::invalid_argument("dobrushin_check: h must be > 0");
  if (!(R >= 2.0))
    throw std::invalid_argument("dobrushin_check: need R >= 2 (V >= 1)");
  if (dt <= 0.0) dt = default_dt(h);
  const int m = params.m;
  const auto lyap = solve_M(params.beta);

  // Radius bound: V(x) <= R - 1 forces |x| <= sqrt((R-1)^2 - 1)/c_*.
  const double r_cap =
      std::sqrt(std::max((R - 1.0) * (R - 1.0) - 1.0, 0.0)) / lyap.c_star;

  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  // Deterministic probes: identical pair and opposite corners.
  pairs.emplace_back(Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m));
  if (m >= 1) {
    Eigen::VectorXd cx = Eigen::VectorXd::Zero(m), cy = Eigen::VectorXd::Zero(m);
    cx[0] = r_cap;
    cy[m - 1] = r_cap;
    if (V_value(cx, lyap) + V_value(cy, lyap) <= R) pairs.emplace_back(cx, cy);
  }
  RngStream rng(master_seed ^ 0xd0b2a5ULL, 0);
  while (pairs.size() < n_pairs) {
    Eigen::VectorXd a(m), b(m);
    for (int k = 0; k < m; ++k) a[k] = r_cap * rng.uniform();
    for (int k = 0; k < m; ++k) b[k] = r_cap * rng.uniform();
    if (V_value(a, lyap) + V_value(b, lyap) <= R) pairs.emplace_back(a, b);
  }

  DobrushinReport report;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto ex = simulate_ensemble(params, pairs[i].first, h, dt, n_paths,
                                      master_seed + 2 * i, KeepMode::Terminal,
                                      {}, n_threads);
    const auto ey = simulate_ensemble(params, pairs[i].second, h, dt, n_paths,
                                      master_seed + 2 * i + 1,
                                      KeepMode::Terminal, {}, n_threads);
    DobrushinPair p;
    p.x = pairs[i].first;
    p.y = pairs[i].second;
    p.tv = tv_distance(ex.terminal(), ey.terminal(), bins_per_axis);
    report.max_tv = std::max(report.max_tv, p.tv);
    report.pairs.push_back(std::move(p));
  }
  report.margin = 2.0 - report.max_tv;
  return report;
}

}  // namespace ajcir
