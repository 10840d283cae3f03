#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ajcir {

// Compensated (Kahan) accumulator; order-independent reductions stay
// reproducible when the summation order is fixed by path index.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
// Standard error of the sample mean.
double standard_error(std::span<const double> xs);

struct ComplexMean {
  std::complex<double> value;
  // sqrt(E|z - mean|^2 / (n(n-1))); equals the jackknife SE of the mean.
  double se = 0.0;
};
ComplexMean complex_mean_se(std::span<const std::complex<double>> zs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  std::size_t n = 0;
};
// Ordinary least squares y = slope*x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct WilsonInterval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
// Wilson score interval for a binomial proportion (default 95%).
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                               double z = 1.959963984540054);

// Empirical quantile (linear interpolation, q in [0,1]); sorts a copy.
double quantile(std::vector<double> xs, double q);

// Two-sample Kolmogorov-Smirnov test; returns the asymptotic p-value.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace ajcir
