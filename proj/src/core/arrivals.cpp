#include "arrivals.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace coxkern {

ArrivalData::ArrivalData(std::vector<double> times, double horizon, double start)
    : times_(std::move(times)), horizon_(horizon), start_(start) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    fail(ErrorCode::invalid_data, "observation horizon T must be positive and finite");
  }
  if (!std::isfinite(start_)) fail(ErrorCode::invalid_data, "window start must be finite");
  const double end = start_ + horizon_;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double s = times_[i];
    if (!std::isfinite(s) || s < start_ || s > end) {
      std::ostringstream msg;
      msg << "event " << i << " at " << s << " lies outside the window [" << start_ << ", " << end
          << "]";
      fail(ErrorCode::invalid_data, msg.str());
    }
    if (i > 0 && s < times_[i - 1]) {
      fail(ErrorCode::invalid_data, "event times must be non-decreasing (index " +
                                        std::to_string(i) + ")");
    }
  }
}

double mean_rate(const ArrivalData& data) {
  return static_cast<double>(data.size()) / data.horizon();
}

}  // namespace coxkern
