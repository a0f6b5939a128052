#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arrivals.hpp"
#include "random.hpp"

namespace coxkern {

/// Two-state Markov rate: A -> B at rate k1, B -> A at rate k2.
struct TwoStateModel {
  double k1 = 2.0;
  double k2 = 5.0;
  double rate_a = 1000.0;
  double rate_b = 400.0;
};

/// lambda(t) = scale * exp(W(t)); W is a zero-mean stationary Gaussian
/// skeleton with autocovariance 1 / (1 + a |t|)^H, held constant on
/// [j * step, (j + 1) * step).
struct LogGaussianModel {
  double scale = 1000.0;    // M
  double inv_time = 1.0;    // a
  double decay = 6.0;       // H
  double step = 0.0;        // skeleton step; <= 0 selects default_skeleton_step

  double covariance(double t) const;
  /// Step for which covariance(step) >= 0.99 * covariance(0).
  double default_skeleton_step() const;
  double effective_step() const { return step > 0.0 ? step : default_skeleton_step(); }
};

struct ConstantModel {
  double rate = 500.0;
};

using RateModel = std::variant<TwoStateModel, LogGaussianModel, ConstantModel>;

void validate(const RateModel& model);
std::string describe(const RateModel& model);

/// Piecewise-constant rate realization on [0, horizon].
class RatePath {
 public:
  RatePath(std::vector<double> breakpoints, std::vector<double> values, double horizon);

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> values() const noexcept { return values_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t segments() const noexcept { return values_.size(); }
  double segment_end(std::size_t i) const noexcept {
    return i + 1 < breakpoints_.size() ? breakpoints_[i + 1] : horizon_;
  }

  double value_at(double t) const;
  /// Integral of lambda over [0, horizon] divided by horizon.
  double time_average() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double horizon_;
};

RatePath simulate_two_state_path(const TwoStateModel& model, double horizon, std::uint64_t seed);

enum class EmbeddingMethod { automatic, circulant, cholesky };

struct SkeletonOptions {
  EmbeddingMethod method = EmbeddingMethod::automatic;
  /// Largest skeleton for which the dense Cholesky fallback is attempted.
  std::size_t cholesky_limit = 4096;
};

RatePath simulate_log_gaussian_path(const LogGaussianModel& model, double horizon,
                                    std::uint64_t seed, const SkeletonOptions& options = {});

RatePath constant_path(const ConstantModel& model, double horizon);

RatePath simulate_path(const RateModel& model, double horizon, std::uint64_t seed);

/// Exact draw of a zero-mean stationary Gaussian sequence of length n with
/// autocovariance acvf(j). Circulant embedding with a nonnegativity check on
/// the embedded spectrum; falls back to a dense Cholesky factor of the
/// Toeplitz covariance for short sequences.
std::vector<double> sample_stationary_gaussian(std::size_t n,
                                               const std::function<double(std::size_t)>& acvf,
                                               Rng& rng, const SkeletonOptions& options = {});

/// Inhomogeneous Poisson arrivals on a piecewise-constant path: per segment,
/// a Poisson count followed by sorted uniform positions.
ArrivalData simulate_arrivals(const RatePath& path, std::uint64_t seed);

double true_mean(const RateModel& model);
/// Autocovariance C(t) = cov(lambda(0), lambda(t)) of the model, t >= 0.
double true_acf(const RateModel& model, double t);
/// Right derivative C'(0+).
double true_acf_slope_at_zero(const RateModel& model);

}  // namespace coxkern
