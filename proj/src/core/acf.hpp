#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "arrivals.hpp"
#include "kernels.hpp"
#include "rate.hpp"

namespace coxkern {

/// Raw ACF estimate at one lag from a rate grid: the mean over s in
/// [bh, T - bh - t] of (lambda_hat(s + t) - mu_hat)(lambda_hat(s) - mu_hat).
/// The lag is rounded to the nearest grid multiple; lag_used reports it.
double estimate_acf_raw(const RateEstimate& grid, double mu_hat, double lag,
                        double* lag_used = nullptr);

/// Convenience form that builds the rate grid first.
double estimate_acf_raw(const ArrivalData& data, const Kernel& kernel, double h, double lag,
                        double grid_step = 0.0);

/// Removes the Poisson self-overlap term (mu_hat / h) * autoconvolution(t / h)
/// for t < 2bh; returns raw unchanged otherwise.
double bias_correct(double raw, double mu_hat, const Kernel& kernel, double h, double lag);

/// Two-regime bandwidth choice per lag: lags below switch_lag use
/// small_bandwidth, the rest use large_bandwidth.
struct BandwidthPolicy {
  double small_bandwidth = 0.0;
  double large_bandwidth = 0.0;
  double switch_lag = 0.0;

  double bandwidth_for(double lag) const {
    return lag < switch_lag ? small_bandwidth : large_bandwidth;
  }
};

/// h = min(rho / mu_hat, h_opt) below 2 b h_opt, h_opt from there on. For a
/// static-rate selection both regimes use the pilot bandwidth.
BandwidthPolicy bandwidth_policy(const BandwidthSelection& selection, const Kernel& kernel);

BandwidthPolicy bandwidth_policy(const ArrivalData& data, const Kernel& kernel, double rho);

struct AcfOptions {
  double rho = 5.0;
  SlopeOptions slope;
  /// Absolute grid step for both rate grids; <= 0 uses h / kGridDivisor.
  double grid_step = 0.0;
  /// Lag count when no lags are given: log-spaced from the finest grid step
  /// to T / 10.
  std::size_t default_lag_count = 50;
};

struct AcfEstimate {
  Kernel kernel;
  double mu_hat = 0.0;
  BandwidthSelection selection;
  BandwidthPolicy policy;
  std::vector<double> lags_requested;
  std::vector<double> lags;  // rounded to the grid of the bandwidth used
  std::vector<double> raw;
  std::vector<double> corrected;
  std::vector<double> h_used;
  std::vector<unsigned char> uses_large;  // per lag: 1 when evaluated on large_grid
  /// Rate grids for the two regimes; the large one is empty when both
  /// regimes share one bandwidth.
  RateEstimate small_grid;
  std::optional<RateEstimate> large_grid;

  std::size_t size() const { return lags.size(); }
  const RateEstimate& grid_for(std::size_t i) const {
    return uses_large[i] ? *large_grid : small_grid;
  }
};

/// Applies the bandwidth policy and evaluates raw and corrected estimates at
/// each lag. An empty lag list selects the default log-spaced grid.
AcfEstimate estimate_acf_curve(const ArrivalData& data, const Kernel& kernel,
                               const std::vector<double>& lags, const AcfOptions& options = {});

/// n logarithmically spaced lags from first to last (inclusive).
std::vector<double> log_spaced_lags(double first, double last, std::size_t n);

}  // namespace coxkern
