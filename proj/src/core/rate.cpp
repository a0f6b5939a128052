#include "rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "grid_ops.hpp"
#include "parallel.hpp"

namespace coxkern {

namespace detail {

LagWindow lag_window(const RateEstimate& grid, double lag) {
  const double reach = 2.0 * grid.kernel.support() * grid.bandwidth;
  if (!(lag >= 0.0) || !(lag < grid.horizon - reach)) {
    std::ostringstream msg;
    msg << "lag " << lag << " outside [0, T - 2bh) = [0, " << grid.horizon - reach << ")";
    fail(ErrorCode::lag_out_of_range, msg.str());
  }
  LagWindow w;
  w.offset = static_cast<std::size_t>(std::llround(lag / grid.step));
  w.lag = static_cast<double>(w.offset) * grid.step;
  w.first = grid.interior_begin;
  const std::size_t span = grid.interior_end - grid.interior_begin;
  if (w.offset >= span) {
    std::ostringstream msg;
    msg << "lag " << lag << " leaves no grid points inside [bh, T - bh - t]";
    fail(ErrorCode::lag_out_of_range, msg.str());
  }
  w.count = span - w.offset;
  return w;
}

double centered_product_mean(const RateEstimate& grid, double mu_hat, const LagWindow& w) {
  const double* v = grid.values.data();
  double sum = 0.0;
  for (std::size_t j = w.first, end = w.first + w.count; j < end; ++j) {
    sum += (v[j] - mu_hat) * (v[j + w.offset] - mu_hat);
  }
  return sum / static_cast<double>(w.count);
}

}  // namespace detail

namespace {

// Grid positions are j * step, so allow a relative roundoff of a few ulps
// when comparing against bh and T - bh; otherwise rescaling the time axis can
// move a point across the boundary.
constexpr double kGridSlack = 1e-9;

bool is_interior(double offset_from_start, double reach_lo, double reach_hi, double step) {
  const double slack = kGridSlack * step;
  return offset_from_start >= reach_lo - slack && offset_from_start <= reach_hi + slack;
}

}  // namespace

RateEstimate estimate_rate(const ArrivalData& data, const Kernel& kernel, double h,
                           double grid_step) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    fail(ErrorCode::invalid_bandwidth, "bandwidth must be positive and finite");
  }
  const double b = kernel.support();
  const double T = data.horizon();
  if (!(2.0 * b * h < T)) {
    std::ostringstream msg;
    msg << "bandwidth " << h << " too large: 2bh must be below T = " << T;
    fail(ErrorCode::bandwidth_too_large, msg.str());
  }
  if (grid_step <= 0.0) grid_step = h / kGridDivisor;
  if (!std::isfinite(grid_step)) fail(ErrorCode::invalid_argument, "grid step must be finite");

  RateEstimate est{kernel, h, data.start(), T, grid_step, {}, 0, 0};
  const auto n = static_cast<std::size_t>(std::floor(T / grid_step + kGridSlack)) + 1;
  est.values.assign(n, 0.0);

  const auto times = data.times();
  const double reach = b * h;
  const double inv_h = 1.0 / h;
  auto kernel_sum = [&](double t, std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += kernel.density((times[i] - t) * inv_h);
    return acc * inv_h;
  };
  auto window = [&](double t) {
    const auto lo = std::lower_bound(times.begin(), times.end(), t - reach);
    const auto hi = std::upper_bound(lo, times.end(), t + reach);
    return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(lo - times.begin()),
                                               static_cast<std::size_t>(hi - times.begin()));
  };

  std::size_t first = n, last = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (is_interior(static_cast<double>(j) * grid_step, reach, T - reach, grid_step)) {
      first = j;
      break;
    }
  }
  for (std::size_t j = n; j-- > 0;) {
    if (is_interior(static_cast<double>(j) * grid_step, reach, T - reach, grid_step)) {
      last = j;
      break;
    }
  }
  if (first <= last && first < n) {
    est.interior_begin = first;
    est.interior_end = last + 1;
    parallel_chunks(est.interior_end - est.interior_begin, [&](std::size_t cb, std::size_t ce) {
      const std::size_t jb = est.interior_begin + cb;
      const std::size_t je = est.interior_begin + ce;
      auto [lo, hi] = window(est.time_at(jb));
      for (std::size_t j = jb; j < je; ++j) {
        const double t = est.time_at(j);
        while (lo < times.size() && times[lo] < t - reach) ++lo;
        if (hi < lo) hi = lo;
        while (hi < times.size() && times[hi] <= t + reach) ++hi;
        est.values[j] = kernel_sum(t, lo, hi);
      }
    });
  }

  const double left_t = data.start() + reach;
  const double right_t = data.start() + T - reach;
  const auto [llo, lhi] = window(left_t);
  const auto [rlo, rhi] = window(right_t);
  const double left = kernel_sum(left_t, llo, lhi);
  const double right = kernel_sum(right_t, rlo, rhi);
  for (std::size_t j = 0; j < std::min(est.interior_begin, n); ++j) est.values[j] = left;
  for (std::size_t j = std::max(est.interior_end, est.interior_begin); j < n; ++j) {
    est.values[j] = right;
  }
  return est;
}

double pilot_bandwidth(const ArrivalData& data, double rho) {
  if (data.empty()) fail(ErrorCode::empty_data, "pilot bandwidth needs at least one event");
  if (!(rho > 0.0)) fail(ErrorCode::invalid_argument, "rho must be positive");
  return rho * data.horizon() / static_cast<double>(data.size());
}

SlopeEstimate estimate_cprime0(const ArrivalData& data, const Kernel& kernel, double h_pilot,
                               const SlopeOptions& options) {
  const RateEstimate grid = estimate_rate(data, kernel, h_pilot, options.grid_step);
  return estimate_cprime0(grid, mean_rate(data), options);
}

SlopeEstimate estimate_cprime0(const RateEstimate& grid, double mu_hat,
                               const SlopeOptions& options) {
  if (options.n_points < 3) {
    fail(ErrorCode::invalid_argument, "C'(0+) regression needs at least 3 lags");
  }
  const Kernel& kernel = grid.kernel;
  const double h = grid.bandwidth;
  const double b = kernel.support();
  const std::size_t n = options.n_points;

  SlopeEstimate est;
  est.bandwidth = h;
  std::vector<detail::LagWindow> windows;
  std::vector<double> correction(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lag = 2.0 * b * h * static_cast<double>(i) / static_cast<double>(n);
    const auto w = detail::lag_window(grid, lag);
    windows.push_back(w);
    est.lags.push_back(w.lag);
    est.regressors.push_back(kernel.abs_moment_integral(w.lag, h));
    correction[i] = mu_hat / h * kernel.autoconvolution(w.lag / h);
  }

  // Per-lag, per-block sums of centered products for the jackknife.
  const std::size_t blocks = std::max<std::size_t>(options.jackknife_blocks, 2);
  const std::size_t span = windows.front().count;
  std::vector<double> block_sum(n * blocks, 0.0);
  std::vector<double> block_count(n * blocks, 0.0);
  const double* v = grid.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = windows[i];
    for (std::size_t k = 0; k < w.count; ++k) {
      const std::size_t j = w.first + k;
      const std::size_t blk = std::min(blocks - 1, k * blocks / span);
      block_sum[i * blocks + blk] += (v[j] - mu_hat) * (v[j + w.offset] - mu_hat);
      block_count[i * blocks + blk] += 1.0;
    }
  }

  auto ols_slope = [&](const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += est.regressors[i];
      my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = est.regressors[i] - mx;
      sxy += dx * (y[i] - my);
      sxx += dx * dx;
    }
    if (!(sxx > 0.0)) fail(ErrorCode::invalid_argument, "degenerate C'(0+) regression design");
    return sxy / sxx;
  };

  std::vector<double> total_sum(n, 0.0), total_count(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      total_sum[i] += block_sum[i * blocks + blk];
      total_count[i] += block_count[i * blocks + blk];
    }
    est.responses.push_back(total_sum[i] / total_count[i] - correction[i]);
  }
  est.slope = ols_slope(est.responses);

  std::vector<double> leave_out(blocks);
  std::vector<double> y(n);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    for (std::size_t i = 0; i < n; ++i) {
      const double cnt = total_count[i] - block_count[i * blocks + blk];
      y[i] = (total_sum[i] - block_sum[i * blocks + blk]) / cnt - correction[i];
    }
    leave_out[blk] = ols_slope(y);
  }
  double mean = 0.0;
  for (double s : leave_out) mean += s;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double s : leave_out) ss += (s - mean) * (s - mean);
  est.standard_error =
      std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));

  est.static_rate =
      !(est.slope < 0.0) || !(est.slope < -options.static_z * est.standard_error);
  return est;
}

double optimal_bandwidth(double mu, double cprime0, const Kernel& kernel) {
  if (!(cprime0 < 0.0)) {
    fail(ErrorCode::invalid_argument, "optimal bandwidth requires C'(0+) < 0");
  }
  if (!(mu > 0.0)) fail(ErrorCode::invalid_argument, "optimal bandwidth requires mu > 0");
  return std::sqrt(mu * kernel.squared_integral() / (cprime0 * kernel.gamma_f()));
}

BandwidthSelection select_bandwidth(const ArrivalData& data, const Kernel& kernel, double rho,
                                    const SlopeOptions& options) {
  const double h_pilot = pilot_bandwidth(data, rho);
  const RateEstimate grid = estimate_rate(data, kernel, h_pilot, options.grid_step);
  return select_bandwidth(grid, mean_rate(data), rho, options);
}

BandwidthSelection select_bandwidth(const RateEstimate& pilot_grid, double mu_hat, double rho,
                                    const SlopeOptions& options) {
  BandwidthSelection sel;
  sel.mu_hat = mu_hat;
  sel.rho = rho;
  sel.h_pilot = pilot_grid.bandwidth;
  sel.slope = estimate_cprime0(pilot_grid, mu_hat, options);
  if (!sel.slope.static_rate) {
    sel.h_opt = optimal_bandwidth(mu_hat, sel.slope.slope, pilot_grid.kernel);
  }
  return sel;
}

double empirical_mise(const RateEstimate& estimate, const RatePath& truth, double mu_hat) {
  const double T = estimate.horizon;
  if (estimate.start != 0.0 || std::abs(truth.horizon() - T) > 1e-9 * T) {
    fail(ErrorCode::invalid_argument, "estimate and truth must share the window [0, T]");
  }
  if (!(mu_hat > 0.0)) fail(ErrorCode::invalid_argument, "normalized MISE needs mu_hat > 0");
  const auto breaks = truth.breakpoints();
  const auto vals = truth.values();
  const std::size_t g = estimate.size();

  // Exact integral of a squared linear function over [a, b].
  auto piece = [](double a, double b, double ea, double eb) {
    return (b - a) * (ea * ea + ea * eb + eb * eb) / 3.0;
  };

  double total = 0.0;
  std::size_t seg = 0;
  for (std::size_t j = 0; j < g; ++j) {
    const double a = estimate.time_at(j);
    const double b = (j + 1 < g) ? estimate.time_at(j + 1) : T;
    if (!(b > a)) continue;
    const double va = estimate.values[j];
    const double vb = (j + 1 < g) ? estimate.values[j + 1] : va;
    const double slope = (vb - va) / (b - a);
    double lo = a;
    while (seg + 1 < breaks.size() && breaks[seg + 1] <= lo) ++seg;
    while (lo < b) {
      const double seg_end = (seg + 1 < breaks.size()) ? breaks[seg + 1] : T;
      const double hi = std::min(b, seg_end);
      const double c = vals[seg];
      const double e_lo = va + slope * (lo - a) - c;
      const double e_hi = va + slope * (hi - a) - c;
      total += piece(lo, hi, e_lo, e_hi);
      lo = hi;
      if (hi >= seg_end && seg + 1 < breaks.size()) ++seg;
      if (hi >= b) break;
    }
  }
  return total / (T * mu_hat * mu_hat);
}

}  // namespace coxkern
