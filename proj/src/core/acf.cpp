#include "acf.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "grid_ops.hpp"
#include "parallel.hpp"

namespace coxkern {

double estimate_acf_raw(const RateEstimate& grid, double mu_hat, double lag, double* lag_used) {
  const auto w = detail::lag_window(grid, lag);
  if (lag_used) *lag_used = w.lag;
  return detail::centered_product_mean(grid, mu_hat, w);
}

double estimate_acf_raw(const ArrivalData& data, const Kernel& kernel, double h, double lag,
                        double grid_step) {
  const double reach = 2.0 * kernel.support() * h;
  if (!(lag >= 0.0) || !(lag < data.horizon() - reach)) {
    fail(ErrorCode::lag_out_of_range, "lag outside [0, T - 2bh)");
  }
  const RateEstimate grid = estimate_rate(data, kernel, h, grid_step);
  return estimate_acf_raw(grid, mean_rate(data), lag);
}

double bias_correct(double raw, double mu_hat, const Kernel& kernel, double h, double lag) {
  if (!(h > 0.0)) fail(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
  if (!(lag >= 0.0)) fail(ErrorCode::invalid_argument, "lag must be nonnegative");
  if (lag >= 2.0 * kernel.support() * h) return raw;
  return raw - mu_hat / h * kernel.autoconvolution(lag / h);
}

BandwidthPolicy bandwidth_policy(const BandwidthSelection& selection, const Kernel& kernel) {
  BandwidthPolicy policy;
  if (selection.static_rate()) {
    policy.small_bandwidth = policy.large_bandwidth = selection.h_pilot;
    policy.switch_lag = 0.0;
    return policy;
  }
  const double h_opt = *selection.h_opt;
  policy.large_bandwidth = h_opt;
  policy.small_bandwidth = std::min(selection.rho / selection.mu_hat, h_opt);
  policy.switch_lag = 2.0 * kernel.support() * h_opt;
  return policy;
}

BandwidthPolicy bandwidth_policy(const ArrivalData& data, const Kernel& kernel, double rho) {
  return bandwidth_policy(select_bandwidth(data, kernel, rho), kernel);
}

std::vector<double> log_spaced_lags(double first, double last, std::size_t n) {
  if (!(first > 0.0) || !(last >= first)) {
    fail(ErrorCode::invalid_argument, "log-spaced lags need 0 < first <= last");
  }
  std::vector<double> lags(n);
  if (n == 1) {
    lags[0] = first;
    return lags;
  }
  const double ratio = std::log(last / first) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) lags[i] = first * std::exp(ratio * static_cast<double>(i));
  lags.back() = last;
  return lags;
}

AcfEstimate estimate_acf_curve(const ArrivalData& data, const Kernel& kernel,
                               const std::vector<double>& lags, const AcfOptions& options) {
  const double mu_hat = mean_rate(data);
  const double h_pilot = pilot_bandwidth(data, options.rho);
  RateEstimate pilot = estimate_rate(data, kernel, h_pilot, options.grid_step);
  BandwidthSelection selection = select_bandwidth(pilot, mu_hat, options.rho, options.slope);
  const BandwidthPolicy policy = bandwidth_policy(selection, kernel);

  AcfEstimate est{kernel, mu_hat, std::move(selection), policy, {}, {}, {}, {}, {}, {},
                  std::move(pilot), std::nullopt};
  if (policy.small_bandwidth != h_pilot) {
    est.small_grid = estimate_rate(data, kernel, policy.small_bandwidth, options.grid_step);
  }
  if (policy.large_bandwidth != policy.small_bandwidth) {
    est.large_grid = estimate_rate(data, kernel, policy.large_bandwidth, options.grid_step);
  }

  est.lags_requested = lags;
  if (est.lags_requested.empty()) {
    est.lags_requested =
        log_spaced_lags(est.small_grid.step, data.horizon() / 10.0, options.default_lag_count);
  }
  const std::size_t n = est.lags_requested.size();
  est.lags.assign(n, 0.0);
  est.raw.assign(n, 0.0);
  est.corrected.assign(n, 0.0);
  est.h_used.assign(n, 0.0);
  est.uses_large.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = policy.bandwidth_for(est.lags_requested[i]);
    est.h_used[i] = h;
    est.uses_large[i] = est.large_grid && h == est.large_grid->bandwidth ? 1 : 0;
  }
  parallel_for_each_index(n, [&](std::size_t i) {
    const RateEstimate& grid = est.grid_for(i);
    double lag_used = 0.0;
    est.raw[i] = estimate_acf_raw(grid, mu_hat, est.lags_requested[i], &lag_used);
    est.lags[i] = lag_used;
    est.corrected[i] = bias_correct(est.raw[i], mu_hat, kernel, grid.bandwidth, lag_used);
  });
  return est;
}

}  // namespace coxkern
