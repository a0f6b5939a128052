#include "varci.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "fft.hpp"
#include "grid_ops.hpp"
#include "parallel.hpp"

namespace coxkern {

namespace {

std::vector<double> centered_products(const RateEstimate& grid, double mu_hat,
                                      const detail::LagWindow& w) {
  std::vector<double> a(w.count);
  const double* v = grid.values.data();
  for (std::size_t k = 0; k < w.count; ++k) {
    const std::size_t j = w.first + k;
    a[k] = (v[j] - mu_hat) * (v[j + w.offset] - mu_hat);
  }
  return a;
}

double mean(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s / static_cast<double>(a.size());
}

}  // namespace

double empirical_cov4(const RateEstimate& grid, double mu_hat, double t, double r) {
  if (!(r >= 0.0)) fail(ErrorCode::lag_out_of_range, "separation r must be nonnegative");
  const double reach = 2.0 * grid.kernel.support() * grid.bandwidth;
  if (!(t + r < grid.horizon - reach)) {
    std::ostringstream msg;
    msg << "t + r = " << t + r << " not below T - 2bh = " << grid.horizon - reach;
    fail(ErrorCode::lag_out_of_range, msg.str());
  }
  const auto w = detail::lag_window(grid, t);
  const auto m = static_cast<std::size_t>(std::llround(r / grid.step));
  if (m >= w.count) fail(ErrorCode::lag_out_of_range, "separation leaves no grid points");
  const auto a = centered_products(grid, mu_hat, w);
  const double c = mean(a);
  double s = 0.0;
  const std::size_t n = w.count - m;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * a[j + m];
  return std::max(s / static_cast<double>(n) - c * c, 0.0);
}

double variance_estimate(const RateEstimate& grid, double mu_hat, double t, double r_max) {
  const auto w = detail::lag_window(grid, t);
  const auto a = centered_products(grid, mu_hat, w);
  const double c = mean(a);
  const std::size_t n = a.size();
  std::size_t max_k = n - 1;
  if (r_max > 0.0) {
    max_k = std::min<std::size_t>(max_k, static_cast<std::size_t>(std::llround(r_max / grid.step)));
  }
  const auto sums = fft::lag_products(a, max_k);
  const double nd = static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    const double remaining = nd - static_cast<double>(k);
    const double cov = std::max(sums[k] / remaining - c * c, 0.0);
    // Trapezoid weight 1/2 at r = 0, doubled by the symmetric prefactor 2.
    total += (k == 0 ? 1.0 : 2.0) * remaining * cov;
  }
  return total / (nd * nd);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::invalid_argument, "quantile level must be in (0, 1)");
  // Acklam's rational approximation, then one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

Interval confidence_interval(double corrected, double variance, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_argument, "alpha must be in (0, 1)");
  if (!(variance >= 0.0)) fail(ErrorCode::invalid_argument, "variance must be nonnegative");
  const double half = normal_quantile(1.0 - 0.5 * alpha) * std::sqrt(variance);
  return {corrected - half, corrected + half};
}

CiBand confidence_band(const AcfEstimate& acf, double alpha, double r_max) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_argument, "alpha must be in (0, 1)");
  CiBand band;
  band.alpha = alpha;
  const std::size_t n = acf.size();
  band.lags = acf.lags;
  band.center = acf.corrected;
  band.lower.assign(n, 0.0);
  band.upper.assign(n, 0.0);
  band.variance.assign(n, 0.0);
  parallel_for_each_index(n, [&](std::size_t i) {
    band.variance[i] = variance_estimate(acf.grid_for(i), acf.mu_hat, acf.lags[i], r_max);
    const auto ci = confidence_interval(acf.corrected[i], band.variance[i], alpha);
    band.lower[i] = ci.lower;
    band.upper[i] = ci.upper;
  });
  return band;
}

}  // namespace coxkern
