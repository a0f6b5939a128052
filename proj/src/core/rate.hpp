#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "arrivals.hpp"
#include "kernels.hpp"
#include "simulate.hpp"

namespace coxkern {

/// Kernel rate estimate on the uniform grid t_j = start + j * step.
///
/// Grid points in [start + bh, end - bh] hold the kernel sum; points closer to
/// either edge copy the value at bh (resp. T - bh) from the left (resp.
/// right). [interior_begin, interior_end) indexes the unclamped points.
struct RateEstimate {
  Kernel kernel;
  double bandwidth = 0.0;
  double start = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  std::vector<double> values;
  std::size_t interior_begin = 0;
  std::size_t interior_end = 0;

  double time_at(std::size_t j) const { return start + static_cast<double>(j) * step; }
  std::size_t size() const { return values.size(); }
};

/// Default grid resolution: ten grid steps per bandwidth.
inline constexpr double kGridDivisor = 10.0;

/// Rate estimate with the boundary clamp. Requires h > 0, 2bh < T and
/// grid_step > 0; grid_step <= 0 selects h / kGridDivisor.
RateEstimate estimate_rate(const ArrivalData& data, const Kernel& kernel, double h,
                           double grid_step = 0.0);

/// rho * T / K, the bandwidth holding rho events on average.
double pilot_bandwidth(const ArrivalData& data, double rho);

struct SlopeOptions {
  std::size_t n_points = 10;
  /// Contiguous time blocks for the delete-one-block jackknife standard error.
  std::size_t jackknife_blocks = 20;
  /// A slope is treated as a fluctuation signal only when
  /// slope < -static_z * standard_error (and always requires slope < 0).
  double static_z = 3.0;
  double grid_step = 0.0;  // <= 0: h / kGridDivisor
};

/// Regression estimate of C'(0+): slope of the bias-corrected ACF against the
/// absolute-moment regressor at lags evenly spaced on [0, 2bh).
struct SlopeEstimate {
  double slope = 0.0;
  double standard_error = 0.0;
  double bandwidth = 0.0;
  std::vector<double> lags;
  std::vector<double> regressors;
  std::vector<double> responses;
  bool static_rate = false;
};

SlopeEstimate estimate_cprime0(const ArrivalData& data, const Kernel& kernel, double h_pilot,
                               const SlopeOptions& options = {});
/// Same, reusing a precomputed rate grid (its bandwidth is the pilot bandwidth).
SlopeEstimate estimate_cprime0(const RateEstimate& grid, double mu_hat,
                               const SlopeOptions& options = {});

/// [mu * integral f^2 / (C'(0+) gamma_f)]^(1/2); requires cprime0 < 0.
double optimal_bandwidth(double mu, double cprime0, const Kernel& kernel);

struct BandwidthSelection {
  double mu_hat = 0.0;
  double rho = 0.0;
  double h_pilot = 0.0;
  SlopeEstimate slope;
  std::optional<double> h_opt;  // empty: static rate, no detectable fluctuation

  bool static_rate() const { return !h_opt.has_value(); }
};

/// Plug-in bandwidth from the pilot-bandwidth regression. A static-rate
/// outcome is a normal result, not an error.
BandwidthSelection select_bandwidth(const ArrivalData& data, const Kernel& kernel,
                                    double rho = 5.0, const SlopeOptions& options = {});
BandwidthSelection select_bandwidth(const RateEstimate& pilot_grid, double mu_hat, double rho,
                                    const SlopeOptions& options = {});

/// (1 / (T mu_hat^2)) * integral over [0, T] of (lambda_hat - lambda)^2, with
/// lambda_hat linearly interpolated between grid points and held constant
/// after the last one.
double empirical_mise(const RateEstimate& estimate, const RatePath& truth, double mu_hat);

}  // namespace coxkern
