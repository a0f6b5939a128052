#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "error.hpp"
#include "fft.hpp"

namespace coxkern {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

void require_horizon(double horizon) {
  if (!positive(horizon)) fail(ErrorCode::invalid_argument, "horizon T must be positive");
}

std::vector<double> cholesky_sample(std::size_t n, const std::function<double(std::size_t)>& acvf,
                                    Rng& rng) {
  // Dense lower-triangular factor of the Toeplitz covariance, row-major.
  std::vector<double> lower(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = acvf(i - j);
      for (std::size_t k = 0; k < j; ++k) sum -= lower[i * n + k] * lower[j * n + k];
      if (i == j) {
        if (!(sum > 0.0)) {
          std::ostringstream msg;
          msg << "covariance is not positive definite (pivot " << sum << " at row " << i << ")";
          fail(ErrorCode::simulation_failure, msg.str());
        }
        lower[i * n + i] = std::sqrt(sum);
      } else {
        lower[i * n + j] = sum / lower[j * n + j];
      }
    }
  }
  std::normal_distribution<double> normal;
  std::vector<double> z(n);
  for (double& v : z) v = normal(rng);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= i; ++k) acc += lower[i * n + k] * z[k];
    out[i] = acc;
  }
  return out;
}

}  // namespace

double LogGaussianModel::covariance(double t) const {
  return std::pow(1.0 + inv_time * std::abs(t), -decay);
}

double LogGaussianModel::default_skeleton_step() const {
  return (std::pow(0.99, -1.0 / decay) - 1.0) / inv_time;
}

void validate(const RateModel& model) {
  std::visit(overloaded{
                 [](const TwoStateModel& m) {
                   if (!positive(m.k1) || !positive(m.k2) || !positive(m.rate_a) ||
                       !positive(m.rate_b)) {
                     fail(ErrorCode::invalid_argument,
                          "two-state model parameters k1, k2, rate_a, rate_b must be positive");
                   }
                 },
                 [](const LogGaussianModel& m) {
                   if (!positive(m.scale) || !positive(m.inv_time) || !positive(m.decay)) {
                     fail(ErrorCode::invalid_argument,
                          "log-Gaussian parameters M, a, H must be positive");
                   }
                   if (m.step < 0.0 || !std::isfinite(m.step)) {
                     fail(ErrorCode::invalid_argument, "skeleton step must be positive");
                   }
                 },
                 [](const ConstantModel& m) {
                   if (!(m.rate >= 0.0) || !std::isfinite(m.rate)) {
                     fail(ErrorCode::invalid_argument, "constant rate must be nonnegative");
                   }
                 },
             },
             model);
}

std::string describe(const RateModel& model) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const TwoStateModel& m) {
                   out << "two-state(k1=" << m.k1 << ", k2=" << m.k2 << ", rate_a=" << m.rate_a
                       << ", rate_b=" << m.rate_b << ")";
                 },
                 [&](const LogGaussianModel& m) {
                   out << "log-gaussian(M=" << m.scale << ", a=" << m.inv_time
                       << ", H=" << m.decay << ", eps=" << m.effective_step() << ")";
                 },
                 [&](const ConstantModel& m) { out << "constant(rate=" << m.rate << ")"; },
             },
             model);
  return out.str();
}

RatePath::RatePath(std::vector<double> breakpoints, std::vector<double> values, double horizon)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), horizon_(horizon) {
  require_horizon(horizon_);
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    fail(ErrorCode::invalid_argument, "rate path needs one value per breakpoint");
  }
  if (breakpoints_.front() != 0.0) fail(ErrorCode::invalid_argument, "rate path must start at 0");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorCode::invalid_argument, "rate path values must be finite and nonnegative");
    }
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      fail(ErrorCode::invalid_argument, "rate path breakpoints must be strictly increasing");
    }
  }
  if (!(breakpoints_.back() < horizon_)) {
    fail(ErrorCode::invalid_argument, "last breakpoint must lie before the horizon");
  }
}

double RatePath::value_at(double t) const {
  if (t <= 0.0) return values_.front();
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double RatePath::time_average() const {
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    total += values_[i] * (segment_end(i) - breakpoints_[i]);
  }
  return total / horizon_;
}

RatePath simulate_two_state_path(const TwoStateModel& model, double horizon, std::uint64_t seed) {
  validate(model);
  require_horizon(horizon);
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> leave_a(model.k1);
  std::exponential_distribution<double> leave_b(model.k2);

  bool in_a = unit(rng) < model.k2 / (model.k1 + model.k2);
  std::vector<double> breaks{0.0};
  std::vector<double> values{in_a ? model.rate_a : model.rate_b};
  double t = 0.0;
  for (;;) {
    t += in_a ? leave_a(rng) : leave_b(rng);
    if (t >= horizon) break;
    in_a = !in_a;
    const double v = in_a ? model.rate_a : model.rate_b;
    if (v != values.back()) {
      breaks.push_back(t);
      values.push_back(v);
    }
  }
  return RatePath(std::move(breaks), std::move(values), horizon);
}

std::vector<double> sample_stationary_gaussian(std::size_t n,
                                               const std::function<double(std::size_t)>& acvf,
                                               Rng& rng, const SkeletonOptions& options) {
  if (n == 0) return {};
  if (n == 1) {
    std::normal_distribution<double> normal(0.0, std::sqrt(acvf(0)));
    return {normal(rng)};
  }
  if (options.method == EmbeddingMethod::cholesky) return cholesky_sample(n, acvf, rng);

  double worst = 0.0;
  std::size_t m = fft::good_size(2 * (n - 1));
  if (m % 2 == 1) m = fft::good_size(m + 1);
  for (int attempt = 0; attempt < 4; ++attempt) {
    const std::size_t half = m / 2;
    std::vector<double> row(m);
    for (std::size_t j = 0; j <= half; ++j) row[j] = acvf(j);
    for (std::size_t j = half + 1; j < m; ++j) row[j] = row[m - j];
    std::vector<double> eig = fft::real_dft_real_part(row);
    const double largest = *std::max_element(eig.begin(), eig.end());
    worst = *std::min_element(eig.begin(), eig.end());
    if (worst >= -1e-10 * largest) {
      std::normal_distribution<double> normal;
      std::vector<std::complex<double>> coef(m);
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) {
        const double scale = std::sqrt(std::max(eig[k], 0.0) * inv_m);
        const double re = normal(rng);
        const double im = normal(rng);
        coef[k] = {scale * re, scale * im};
      }
      fft::forward(coef);
      std::vector<double> out(n);
      for (std::size_t j = 0; j < n; ++j) out[j] = coef[j].real();
      return out;
    }
    m = fft::good_size(2 * m);
    if (m % 2 == 1) m = fft::good_size(m + 1);
  }
  if (options.method == EmbeddingMethod::automatic && n <= options.cholesky_limit) {
    return cholesky_sample(n, acvf, rng);
  }
  std::ostringstream msg;
  msg << "circulant embedding failed: embedded spectrum has negative eigenvalue " << worst
      << " for a skeleton of " << n << " points";
  fail(ErrorCode::simulation_failure, msg.str());
}

RatePath simulate_log_gaussian_path(const LogGaussianModel& model, double horizon,
                                    std::uint64_t seed, const SkeletonOptions& options) {
  validate(model);
  require_horizon(horizon);
  const double eps = model.effective_step();
  const auto n = static_cast<std::size_t>(std::ceil(horizon / eps));
  Rng rng = make_rng(seed);
  const std::vector<double> w = sample_stationary_gaussian(
      n, [&](std::size_t j) { return model.covariance(static_cast<double>(j) * eps); }, rng,
      options);
  std::vector<double> breaks;
  std::vector<double> values;
  breaks.reserve(n);
  values.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double b = static_cast<double>(j) * eps;
    if (b >= horizon) break;
    breaks.push_back(b);
    values.push_back(model.scale * std::exp(w[j]));
  }
  return RatePath(std::move(breaks), std::move(values), horizon);
}

RatePath constant_path(const ConstantModel& model, double horizon) {
  validate(model);
  return RatePath({0.0}, {model.rate}, horizon);
}

RatePath simulate_path(const RateModel& model, double horizon, std::uint64_t seed) {
  return std::visit(
      overloaded{
          [&](const TwoStateModel& m) { return simulate_two_state_path(m, horizon, seed); },
          [&](const LogGaussianModel& m) { return simulate_log_gaussian_path(m, horizon, seed); },
          [&](const ConstantModel& m) { return constant_path(m, horizon); },
      },
      model);
}

ArrivalData simulate_arrivals(const RatePath& path, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(path.time_average() * path.horizon() * 1.01) + 16);
  for (std::size_t i = 0; i < path.segments(); ++i) {
    const double lo = path.breakpoints()[i];
    const double hi = path.segment_end(i);
    const double mean = path.values()[i] * (hi - lo);
    if (!(mean > 0.0)) continue;
    std::poisson_distribution<long long> count_dist(mean);
    const long long count = count_dist(rng);
    std::uniform_real_distribution<double> where(lo, hi);
    const std::size_t first = times.size();
    for (long long c = 0; c < count; ++c) times.push_back(where(rng));
    std::sort(times.begin() + static_cast<std::ptrdiff_t>(first), times.end());
  }
  return ArrivalData(std::move(times), path.horizon());
}

double true_mean(const RateModel& model) {
  return std::visit(overloaded{
                        [](const TwoStateModel& m) {
                          return (m.k2 * m.rate_a + m.k1 * m.rate_b) / (m.k1 + m.k2);
                        },
                        [](const LogGaussianModel& m) {
                          return m.scale * std::exp(0.5 * m.covariance(0.0));
                        },
                        [](const ConstantModel& m) { return m.rate; },
                    },
                    model);
}

double true_acf(const RateModel& model, double t) {
  t = std::abs(t);
  return std::visit(overloaded{
                        [&](const TwoStateModel& m) {
                          const double d = m.rate_a - m.rate_b;
                          const double s = m.k1 + m.k2;
                          return d * d * m.k1 * m.k2 * std::exp(-s * t) / (s * s);
                        },
                        [&](const LogGaussianModel& m) {
                          const double g0 = m.covariance(0.0);
                          return m.scale * m.scale * std::exp(g0) *
                                 std::expm1(m.covariance(t));
                        },
                        [](const ConstantModel&) { return 0.0; },
                    },
                    model);
}

double true_acf_slope_at_zero(const RateModel& model) {
  return std::visit(overloaded{
                        [&](const TwoStateModel& m) {
                          return -(m.k1 + m.k2) * true_acf(model, 0.0);
                        },
                        [](const LogGaussianModel& m) {
                          // gamma'(0+) = -a H and gamma(0) = 1.
                          const double g0 = m.covariance(0.0);
                          return -m.scale * m.scale * std::exp(2.0 * g0) * m.inv_time * m.decay;
                        },
                        [](const ConstantModel&) { return 0.0; },
                    },
                    model);
}

}  // namespace coxkern
