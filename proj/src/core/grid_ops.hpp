#pragma once

#include <cstddef>

#include "rate.hpp"

namespace coxkern::detail {

// Lag window on a rate grid: the lag is rounded to offset grid steps, and
// products (v_j - mu)(v_{j+offset} - mu) run over j in [first, first + count),
// i.e. over s_j in [bh, T - bh - lag].
struct LagWindow {
  std::size_t offset = 0;
  double lag = 0.0;  // offset * step
  std::size_t first = 0;
  std::size_t count = 0;
};

// Throws lag_out_of_range unless 0 <= lag < T - 2bh and the rounded window is
// nonempty.
LagWindow lag_window(const RateEstimate& grid, double lag);

// Mean of the centered products over the window.
double centered_product_mean(const RateEstimate& grid, double mu_hat, const LagWindow& w);

}  // namespace coxkern::detail
