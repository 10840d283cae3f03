#include "ajcir/density.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ajcir {

using C = std::complex<double>;
using std::numbers::pi;

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

namespace {

double trapezoid_weight(const GridAxis& ax, int i) {
  return (i == 0 || i == ax.count - 1) ? 0.5 * ax.step : ax.step;
}

void check_grid(const DensityGrid& grid) {
  std::size_t expect = 1;
  for (const auto& ax : grid.axes) {
    if (ax.count < 2 || !(ax.step > 0.0))
      throw std::invalid_argument("DensityGrid: axis needs count >= 2, step > 0");
    expect *= static_cast<std::size_t>(ax.count);
  }
  if (grid.values.size() != expect)
    throw std::invalid_argument("DensityGrid: value count mismatch");
}

// Row-major index decomposition helpers.
struct GridIndexer {
  std::vector<int> counts;
  std::vector<std::size_t> strides;

  explicit GridIndexer(const std::vector<GridAxis>& axes) {
    counts.reserve(axes.size());
    for (const auto& ax : axes) counts.push_back(ax.count);
    strides.assign(axes.size(), 1);
    for (int k = static_cast<int>(axes.size()) - 2; k >= 0; --k)
      strides[k] = strides[k + 1] * static_cast<std::size_t>(counts[k + 1]);
  }
  std::size_t total() const {
    return strides.empty() ? 0 : strides[0] * static_cast<std::size_t>(counts[0]);
  }
  void decompose(std::size_t flat, std::vector<int>& idx) const {
    idx.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      idx[k] = static_cast<int>(flat / strides[k]);
      flat %= strides[k];
    }
  }
};

}  // namespace

double DensityGrid::integral() const {
  check_grid(*this);
  const GridIndexer ix(axes);
  std::vector<int> idx;
  double total = 0.0;
  for (std::size_t f = 0; f < values.size(); ++f) {
    ix.decompose(f, idx);
    double w = 1.0;
    for (std::size_t k = 0; k < axes.size(); ++k)
      w *= trapezoid_weight(axes[k], idx[k]);
    total += w * values[f];
  }
  return total;
}

Anisotropy anisotropy(const Eigen::VectorXd& alpha) {
  const int m = static_cast<int>(alpha.size());
  if (m < 1) throw std::invalid_argument("anisotropy: empty alpha");
  double inv_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!(alpha[i] > 1.0 && alpha[i] < 2.0))
      throw std::invalid_argument("anisotropy: alpha entries must lie in (1,2)");
    inv_sum += 1.0 / alpha[i];
  }
  Anisotropy out;
  out.alpha_bar = static_cast<double>(m) / inv_sum;
  out.a = Eigen::VectorXd(m);
  for (int i = 0; i < m; ++i) out.a[i] = out.alpha_bar / alpha[i];
  return out;
}

double rho_delta(const Eigen::VectorXd& y, double delta,
                 const Eigen::VectorXd& alpha) {
  if (y.size() != alpha.size())
    throw std::invalid_argument("rho_delta: dimension mismatch");
  double v = delta;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (y[k] < 0.0) return 0.0;
    v = std::min(v, std::pow(y[k], 1.0 / alpha[k]));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Fourier inversion of the 1d characteristic function
// ---------------------------------------------------------------------------

CharTable1D CharTable1D::build(const ModelParams& params, double t,
                               double y_abs_max, const HeatKernelOptions& opts) {
  if (params.m != 1)
    throw std::invalid_argument("CharTable1D: one-dimensional models only");
  if (!(t > 0.0)) throw std::invalid_argument("CharTable1D: t must be > 0");
  if (!(y_abs_max > 0.0))
    throw std::invalid_argument("CharTable1D: y_abs_max must be > 0");

  CharTable1D table;
  table.t_ = t;
  table.du_ = pi / (opts.alias_factor * y_abs_max);
  if (opts.probe_condition_a) {
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i)
      grid.push_back(std::pow(10.0, -1.0 + 4.0 * i / 15.0));
    try {
      table.condition_a_warned_ = !check_condition_a(params, grid).overall;
    } catch (const std::exception&) {
      table.condition_a_warned_ = true;
    }
  }

  const double t_grid[1] = {t};
  const int block = 256;
  int consecutive_small = 0;
  while (consecutive_small < 3) {
    const std::size_t begin = table.phi_.size();
    if (table.du_ * static_cast<double>(begin) > opts.u_cap)
      throw std::runtime_error(
          "CharTable1D: |char| did not fall below trunc_tol before u_cap "
          "(truncation failure)");
    table.phi_.resize(begin + block);
    table.psi_.resize(begin + block);
#pragma omp parallel for schedule(dynamic, 8)
    for (int j = 0; j < block; ++j) {
      const double u = table.du_ * static_cast<double>(begin + j);
      Eigen::VectorXcd u0(1);
      u0 << C(0.0, u);
      const auto states = solve_riccati(params, u0, t_grid, opts.riccati);
      table.phi_[begin + j] = states.back().phi;
      table.psi_[begin + j] = states.back().psi[0];
    }
    for (std::size_t j = begin; j < table.phi_.size(); ++j) {
      // exp(Re phi) bounds |char| uniformly over x >= 0 since Re psi <= 0.
      if (std::exp(table.phi_[j].real()) < opts.trunc_tol) {
        if (++consecutive_small >= 3) {
          table.phi_.resize(j + 1);
          table.psi_.resize(j + 1);
          break;
        }
      } else {
        consecutive_small = 0;
      }
    }
  }
  return table;
}

CharTable1D CharTable1D::build_invariant(const ModelParams& params,
                                         double y_abs_max,
                                         const HeatKernelOptions& opts) {
  if (params.m != 1)
    throw std::invalid_argument("CharTable1D: one-dimensional models only");
  CharTable1D table;
  table.invariant_ = true;
  table.du_ = pi / (opts.alias_factor * y_abs_max);
  if (opts.probe_condition_a) {
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i)
      grid.push_back(std::pow(10.0, -1.0 + 4.0 * i / 15.0));
    try {
      table.condition_a_warned_ = !check_condition_a(params, grid).overall;
    } catch (const std::exception&) {
      table.condition_a_warned_ = true;
    }
  }

  const int block = 256;
  int consecutive_small = 0;
  while (consecutive_small < 3) {
    const std::size_t begin = table.phi_.size();
    if (table.du_ * static_cast<double>(begin) > opts.u_cap)
      throw std::runtime_error(
          "CharTable1D: invariant char did not fall below trunc_tol before "
          "u_cap (truncation failure)");
    table.phi_.resize(begin + block);
    table.psi_.resize(begin + block, C(0.0, 0.0));
#pragma omp parallel for schedule(dynamic, 8)
    for (int j = 0; j < block; ++j) {
      const double u = table.du_ * static_cast<double>(begin + j);
      Eigen::VectorXcd u0(1);
      u0 << C(0.0, u);
      table.phi_[begin + j] =
          invariant_char(params, u0, 1e-12, 1e5, opts.riccati);
    }
    for (std::size_t j = begin; j < table.phi_.size(); ++j) {
      if (std::exp(table.phi_[j].real()) < opts.trunc_tol) {
        if (++consecutive_small >= 3) {
          table.phi_.resize(j + 1);
          table.psi_.resize(j + 1);
          break;
        }
      } else {
        consecutive_small = 0;
      }
    }
  }
  return table;
}

DensityGrid CharTable1D::invert(double x, const GridAxis& y_axis, int x_order,
                                int y_order) const {
  if (x < 0.0) throw std::invalid_argument("CharTable1D: x must be >= 0");
  if (x_order < 0 || y_order < 0 || x_order + y_order > 4)
    throw std::invalid_argument("CharTable1D: derivative orders limited to n+k <= 4");
  if (invariant_ && x_order > 0)
    throw std::invalid_argument("CharTable1D: invariant table has no x-derivatives");

  const std::size_t n_u = phi_.size();
  std::vector<C> weights(n_u);
  for (std::size_t j = 0; j < n_u; ++j) {
    const double u = du_ * static_cast<double>(j);
    C f = std::exp(phi_[j] + x * psi_[j]);
    for (int n = 0; n < x_order; ++n) f *= psi_[j];
    for (int k = 0; k < y_order; ++k) f *= C(0.0, -u);
    if (j == 0 || j + 1 == n_u) f *= 0.5;
    weights[j] = f;
  }

  DensityGrid out;
  out.axes = {y_axis};
  out.values.assign(static_cast<std::size_t>(y_axis.count), 0.0);
  out.u_max = du_ * static_cast<double>(n_u - 1);
  out.du = du_;

#pragma omp parallel for schedule(static)
  for (int i = 0; i < y_axis.count; ++i) {
    const double y = y_axis.at(i);
    // Half-line sum doubled: conj-symmetry of the integrand in u.
    double acc = 0.0;
    for (std::size_t j = 0; j < n_u; ++j) {
      const double uy = du_ * static_cast<double>(j) * y;
      acc += weights[j].real() * std::cos(uy) + weights[j].imag() * std::sin(uy);
    }
    out.values[i] = acc * du_ / pi;
  }

  if (x_order == 0 && y_order == 0) {
    double clipped = 0.0;
    for (int i = 0; i < y_axis.count; ++i) {
      if (out.values[i] < 0.0) {
        clipped += -out.values[i] * trapezoid_weight(y_axis, i);
        out.values[i] = 0.0;
      }
    }
    out.clipped_mass = clipped;
    out.suspect = clipped > 1e-4;
  }
  return out;
}

Eigen::MatrixXd CharTable1D::invert_many(std::span<const double> x_values,
                                         const GridAxis& y_axis) const {
  const std::size_t n_u = phi_.size();
  const int n_x = static_cast<int>(x_values.size());
  // Phase factors shared across initial states.
  Eigen::MatrixXcd phase(y_axis.count, n_u);
  for (int i = 0; i < y_axis.count; ++i) {
    const double y = y_axis.at(i);
    for (std::size_t j = 0; j < n_u; ++j) {
      const double uy = du_ * static_cast<double>(j) * y;
      const double w = (j == 0 || j + 1 == n_u) ? 0.5 : 1.0;
      phase(i, static_cast<Eigen::Index>(j)) = w * C(std::cos(uy), std::sin(uy));
    }
  }
  Eigen::MatrixXd out(n_x, y_axis.count);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_x; ++r) {
    Eigen::VectorXcd chi(n_u);
    for (std::size_t j = 0; j < n_u; ++j)
      chi[static_cast<Eigen::Index>(j)] = std::exp(phi_[j] + x_values[r] * psi_[j]);
    for (int i = 0; i < y_axis.count; ++i) {
      const C dot = phase.row(i) * chi;
      out(r, i) = std::max(0.0, dot.real() * du_ / pi);
    }
  }
  return out;
}

DensityGrid heat_kernel_1d(const ModelParams& params, double x, double t,
                           const GridAxis& y_axis,
                           const HeatKernelOptions& opts) {
  const double y_abs = std::max(std::abs(y_axis.origin), std::abs(y_axis.last()));
  const auto table = CharTable1D::build(params, t, y_abs, opts);
  return table.invert(x, y_axis);
}

DensityGrid heat_kernel_derivative_1d(const ModelParams& params, double x,
                                      double t, const GridAxis& y_axis, int n,
                                      int k, const HeatKernelOptions& opts) {
  const double y_abs = std::max(std::abs(y_axis.origin), std::abs(y_axis.last()));
  const auto table = CharTable1D::build(params, t, y_abs, opts);
  return table.invert(x, y_axis, n, k);
}

DensityGrid invariant_density_1d(const ModelParams& params,
                                 const GridAxis& y_axis,
                                 const HeatKernelOptions& opts) {
  const double y_abs = std::max(std::abs(y_axis.origin), std::abs(y_axis.last()));
  const auto table = CharTable1D::build_invariant(params, y_abs, opts);
  return table.invert(0.0, y_axis);
}

// ---------------------------------------------------------------------------
// Anisotropic norms
// ---------------------------------------------------------------------------

std::vector<double> default_h_set(double h_min, double h_max) {
  if (!(h_min > 0.0 && h_min < h_max))
    throw std::invalid_argument("default_h_set: need 0 < h_min < h_max");
  std::vector<double> hs;
  const int n = 17;
  for (int i = 0; i < n; ++i) {
    const double h =
        h_min * std::pow(h_max / h_min, static_cast<double>(i) / (n - 1));
    hs.push_back(h);
    hs.push_back(-h);
  }
  std::sort(hs.begin(), hs.end());
  return hs;
}

namespace {

// ||Delta_{h e_k} f|| with the requested norm; shifts use linear
// interpolation on the grid, zero extension outside.
template <bool kL1>
double difference_norm(const DensityGrid& grid, int axis_k, double h) {
  const GridIndexer ix(grid.axes);
  const GridAxis& ax = grid.axes[axis_k];
  std::vector<int> idx;
  double acc = 0.0;
  for (std::size_t f = 0; f < grid.values.size(); ++f) {
    ix.decompose(f, idx);
    // Position shifted by h along axis k, in fractional index units.
    const double pos = static_cast<double>(idx[axis_k]) + h / ax.step;
    double shifted = 0.0;
    const int lo = static_cast<int>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    auto at = [&](int i_k) -> double {
      if (i_k < 0 || i_k >= ax.count) return 0.0;
      const std::size_t off =
          f + (static_cast<std::size_t>(i_k) - static_cast<std::size_t>(idx[axis_k])) *
                  ix.strides[axis_k];
      return grid.values[off];
    };
    shifted = (1.0 - frac) * at(lo) + frac * at(lo + 1);
    const double diff = shifted - grid.values[f];
    if constexpr (kL1) {
      double w = 1.0;
      for (std::size_t k = 0; k < grid.axes.size(); ++k)
        w *= trapezoid_weight(grid.axes[k], idx[k]);
      acc += std::abs(diff) * w;
    } else {
      acc = std::max(acc, std::abs(diff));
    }
  }
  return acc;
}

template <bool kL1>
double aniso_norm_impl(const DensityGrid& grid, double smoothness,
                       const Anisotropy& aniso, std::span<const double> h_set,
                       const char* who) {
  check_grid(grid);
  if (grid.dims() != aniso.a.size())
    throw std::invalid_argument(std::string(who) + ": anisotropy dimension mismatch");
  if (h_set.empty())
    throw std::invalid_argument(std::string(who) + ": empty h_set");
  double h_min = std::numeric_limits<double>::infinity();
  for (double h : h_set) {
    if (h == 0.0 || std::abs(h) > 1.0)
      throw std::invalid_argument(std::string(who) +
                                  ": h values must lie in [-1,1] \\ {0}");
    h_min = std::min(h_min, std::abs(h));
  }
  for (int k = 0; k < grid.dims(); ++k) {
    const double expo = smoothness / aniso.a[k];
    if (!(expo > 0.0 && expo < 1.0))
      throw std::invalid_argument(std::string(who) +
                                  ": smoothness/a_k must lie in (0,1)");
    if (h_min < grid.axes[k].step)
      throw std::runtime_error(std::string(who) +
                               ": grid too coarse for the smallest |h|");
  }

  double base;
  if constexpr (kL1) {
    std::vector<int> idx;
    const GridIndexer ix(grid.axes);
    base = 0.0;
    for (std::size_t f = 0; f < grid.values.size(); ++f) {
      ix.decompose(f, idx);
      double w = 1.0;
      for (std::size_t k = 0; k < grid.axes.size(); ++k)
        w *= trapezoid_weight(grid.axes[k], idx[k]);
      base += std::abs(grid.values[f]) * w;
    }
  } else {
    base = 0.0;
    for (double v : grid.values) base = std::max(base, std::abs(v));
  }

  double total = base;
  for (int k = 0; k < grid.dims(); ++k) {
    double semi = 0.0;
    for (double h : h_set) {
      const double d = difference_norm<kL1>(grid, k, h);
      semi = std::max(semi, std::pow(std::abs(h), -smoothness / aniso.a[k]) * d);
    }
    total += semi;
  }
  return total;
}

}  // namespace

double besov_norm(const DensityGrid& grid, double lambda, const Anisotropy& aniso,
                  std::span<const double> h_set) {
  return aniso_norm_impl<true>(grid, lambda, aniso, h_set, "besov_norm");
}

double holder_zygmund_norm(const DensityGrid& grid, double eta,
                           const Anisotropy& aniso,
                           std::span<const double> h_set) {
  return aniso_norm_impl<false>(grid, eta, aniso, h_set, "holder_zygmund_norm");
}

// ---------------------------------------------------------------------------
// Weighted kernel density estimate
// ---------------------------------------------------------------------------

DensityGrid weighted_kde(const Eigen::MatrixXd& samples, double delta,
                         const Eigen::VectorXd& alpha,
                         const std::vector<GridAxis>& axes,
                         Eigen::VectorXd bandwidth) {
  const int m = static_cast<int>(axes.size());
  const Eigen::Index n = samples.rows();
  if (samples.cols() != m || alpha.size() != m)
    throw std::invalid_argument("weighted_kde: dimension mismatch");
  if (n < 2) throw std::invalid_argument("weighted_kde: need >= 2 samples");

  if (bandwidth.size() == 0) {
    // Silverman-type rule per axis, scaled by the anisotropy weight a_i.
    const auto aniso = anisotropy(alpha);
    bandwidth.resize(m);
    const double factor =
        std::pow(4.0 / ((m + 2.0) * static_cast<double>(n)), 1.0 / (m + 4.0));
    for (int k = 0; k < m; ++k) {
      const double sd = std::sqrt(
          (samples.col(k).array() - samples.col(k).mean()).square().sum() /
          static_cast<double>(n - 1));
      bandwidth[k] = std::max(1e-12, aniso.a[k] * sd * factor);
    }
  }
  if (bandwidth.size() != m || (bandwidth.array() <= 0.0).any())
    throw std::invalid_argument("weighted_kde: bandwidth must be positive per axis");

  // Sort sample rows by the first coordinate so each node only visits the
  // samples inside its kernel window along axis 0.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return samples(a, 0) < samples(b, 0);
  });
  std::vector<double> sorted0(n);
  for (Eigen::Index i = 0; i < n; ++i) sorted0[i] = samples(order[i], 0);

  const double window = 5.0;
  double norm = 1.0 / static_cast<double>(n);
  for (int k = 0; k < m; ++k) norm /= bandwidth[k] * std::sqrt(2.0 * pi);

  DensityGrid out;
  out.axes = axes;
  out.weight_delta = delta;
  const GridIndexer ix(axes);
  out.values.assign(ix.total(), 0.0);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t f = 0; f < static_cast<std::int64_t>(out.values.size()); ++f) {
    std::vector<int> idx;
    ix.decompose(static_cast<std::size_t>(f), idx);
    Eigen::VectorXd y(m);
    for (int k = 0; k < m; ++k) y[k] = axes[k].at(idx[k]);
    const double w = rho_delta(y, delta, alpha);
    if (w == 0.0) continue;

    const double lo = y[0] - window * bandwidth[0];
    const double hi = y[0] + window * bandwidth[0];
    const auto it_lo = std::lower_bound(sorted0.begin(), sorted0.end(), lo);
    const auto it_hi = std::upper_bound(sorted0.begin(), sorted0.end(), hi);
    double acc = 0.0;
    for (auto it = it_lo; it != it_hi; ++it) {
      const int s = order[static_cast<std::size_t>(it - sorted0.begin())];
      double q = 0.0;
      bool inside = true;
      for (int k = 0; k < m; ++k) {
        const double d = (samples(s, k) - y[k]) / bandwidth[k];
        if (std::abs(d) > window) {
          inside = false;
          break;
        }
        q += d * d;
      }
      if (inside) acc += std::exp(-0.5 * q);
    }
    out.values[static_cast<std::size_t>(f)] = w * norm * acc;
  }
  return out;
}

}  // namespace ajcir
