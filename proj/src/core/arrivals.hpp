#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace coxkern {

/// Event timestamps observed on the window [start, start + horizon].
class ArrivalData {
 public:
  /// Throws invalid_data unless times are finite, non-decreasing and inside
  /// the window, and horizon > 0.
  ArrivalData(std::vector<double> times, double horizon, double start = 0.0);

  std::span<const double> times() const noexcept { return times_; }
  double horizon() const noexcept { return horizon_; }
  double start() const noexcept { return start_; }
  double end() const noexcept { return start_ + horizon_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

 private:
  std::vector<double> times_;
  double horizon_;
  double start_;
};

/// K / T.
double mean_rate(const ArrivalData& data);

}  // namespace coxkern
