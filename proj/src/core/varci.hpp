#pragma once

#include <vector>

#include "acf.hpp"
#include "rate.hpp"

namespace coxkern {

/// max{ mean over s of a(s) a(s + r) - C_hat(t)^2, 0 } with
/// a(s) = (lambda_hat(s) - mu_hat)(lambda_hat(s + t) - mu_hat), s running over
/// [bh, T - bh - t - r]. Both t and r are rounded to grid steps.
double empirical_cov4(const RateEstimate& grid, double mu_hat, double t, double r);

/// V_hat(t) = (2 / L^2) * integral_0^L (L - r) cov4(t, r) dr, L = T - t - 2bh,
/// by the trapezoid rule on the grid. All lag products of a(s) come from one
/// zero-padded FFT. r_max > 0 truncates the r integral at r_max.
double variance_estimate(const RateEstimate& grid, double mu_hat, double t, double r_max = 0.0);

/// Phi^{-1}(p) for 0 < p < 1.
double normal_quantile(double p);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// corrected -/+ Phi^{-1}(1 - alpha / 2) sqrt(variance).
Interval confidence_interval(double corrected, double variance, double alpha);

struct CiBand {
  std::vector<double> lags;
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> variance;
  double alpha = 0.05;

  std::size_t size() const { return lags.size(); }
};

/// Variance and pointwise interval at every lag of an ACF curve, each on the
/// rate grid its lag was estimated from.
CiBand confidence_band(const AcfEstimate& acf, double alpha, double r_max = 0.0);

}  // namespace coxkern
