#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "acf.hpp"
#include "error.hpp"
#include "oracles.hpp"
#include "simulate.hpp"

using namespace coxkern;

namespace {

const char* const kNames[] = {"uniform", "epanechnikov", "triangular", "quartic"};

BandwidthSelection fluctuating(double mu, double rho, double h_opt) {
  BandwidthSelection s;
  s.mu_hat = mu;
  s.rho = rho;
  s.h_pilot = rho / mu;
  s.h_opt = h_opt;
  return s;
}

}  // namespace

TEST_CASE("bias correction only inside 2bh") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const char* name : kNames) {
    CAPTURE(name);
    const Kernel k = Kernel::by_name(name);
    for (int i = 0; i < 50; ++i) {
      const double h = 0.01 + u(rng);
      const double mu = 10.0 + 1000.0 * u(rng);
      const double raw = 1e4 * (u(rng) - 0.5);
      const double outside = 2.0 * h * (1.0 + 3.0 * u(rng));
      CHECK(bias_correct(raw, mu, k, h, outside) == raw);
      const double inside = 2.0 * h * 0.999 * u(rng);
      const double expected = raw - mu / h * oracle::autoconvolution(name, inside / h);
      // Simpson on the uniform kernel's jumps limits the oracle to ~1e-6 of mu / h.
      CHECK(bias_correct(raw, mu, k, h, inside) == doctest::Approx(expected).epsilon(1e-6).scale(mu / h));
    }
  }
}

TEST_CASE("bias correction examples") {
  CHECK(bias_correct(600.0, 100.0, Kernel::uniform(), 0.1, 0.0) == doctest::Approx(100.0));
  CHECK(bias_correct(600.0, 100.0, Kernel::uniform(), 0.1, 0.1) == doctest::Approx(350.0));
  CHECK(bias_correct(600.0, 100.0, Kernel::uniform(), 0.1, 0.2) == 600.0);
  CHECK(bias_correct(0.0, 800.0, Kernel::epanechnikov(), 0.01, 0.0) == doctest::Approx(-48000.0));
  CHECK_THROWS_AS(bias_correct(1.0, 1.0, Kernel::uniform(), 0.0, 0.1), Error);
  CHECK_THROWS_AS(bias_correct(1.0, 1.0, Kernel::uniform(), 0.1, -0.1), Error);
}

TEST_CASE("bandwidth policy examples") {
  const Kernel k = Kernel::epanechnikov();
  const auto p = bandwidth_policy(fluctuating(828.0, 5.0, 0.064), k);
  CHECK(p.small_bandwidth == doctest::Approx(5.0 / 828.0));
  CHECK(p.large_bandwidth == doctest::Approx(0.064));
  CHECK(p.switch_lag == doctest::Approx(0.128));
  CHECK(p.bandwidth_for(0.1) == p.small_bandwidth);
  CHECK(p.bandwidth_for(0.128) == p.large_bandwidth);

  // A plug-in bandwidth below the pilot caps the small regime.
  const auto capped = bandwidth_policy(fluctuating(100.0, 5.0, 0.02), k);
  CHECK(capped.small_bandwidth == doctest::Approx(0.02));
  CHECK(capped.large_bandwidth == doctest::Approx(0.02));

  BandwidthSelection flat;
  flat.mu_hat = 500.0;
  flat.rho = 5.0;
  flat.h_pilot = 0.01;
  const auto s = bandwidth_policy(flat, k);
  CHECK(s.small_bandwidth == 0.01);
  CHECK(s.large_bandwidth == 0.01);
  CHECK(s.switch_lag == 0.0);
}

TEST_CASE("raw estimate matches a direct lagged mean") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> times(300);
  for (auto& t : times) t = u(rng);
  std::sort(times.begin(), times.end());
  const ArrivalData data(times, 10.0);
  const double h = 0.2, step = 0.02, mu = 30.0;
  const RateEstimate grid = estimate_rate(data, Kernel::triangular(), h, step);
  for (double lag : {0.0, 0.1, 0.33, 1.0, 4.0}) {
    CAPTURE(lag);
    double used = -1.0;
    const double got = estimate_acf_raw(grid, mu, lag, &used);
    const long m = std::lround(lag / step);
    CHECK(used == doctest::Approx(m * step));
    double s = 0.0;
    int n = 0;
    for (long j = 0; j * step <= 10.0 + 1e-9; ++j) {
      const double t = j * step;
      if (t < h - 1e-9 || t + m * step > 10.0 - h + 1e-9) continue;
      s += (oracle::direct_rate(times, "triangular", h, t) - mu) *
           (oracle::direct_rate(times, "triangular", h, t + m * step) - mu);
      ++n;
    }
    CHECK(got == doctest::Approx(s / n).epsilon(1e-9));
  }
  CHECK_THROWS_AS(estimate_acf_raw(grid, mu, 9.7), Error);
  CHECK_THROWS_AS(estimate_acf_raw(grid, mu, -0.1), Error);
}

TEST_CASE("log-spaced lags") {
  const auto lags = log_spaced_lags(0.01, 10.0, 4);
  REQUIRE(lags.size() == 4);
  CHECK(lags[0] == doctest::Approx(0.01));
  CHECK(lags[1] == doctest::Approx(0.1));
  CHECK(lags[2] == doctest::Approx(1.0));
  CHECK(lags[3] == 10.0);
  CHECK_THROWS_AS(log_spaced_lags(0.0, 1.0, 3), Error);
  CHECK_THROWS_AS(log_spaced_lags(2.0, 1.0, 3), Error);
}

TEST_CASE("constant-rate data gives a near-zero corrected ACF") {
  const ArrivalData data = simulate_arrivals(constant_path(ConstantModel{500.0}, 500.0), 31);
  const AcfEstimate acf = estimate_acf_curve(data, Kernel::epanechnikov(), {0.0, 0.1, 1.0, 10.0});
  REQUIRE(acf.size() == 4);
  const double mu2 = acf.mu_hat * acf.mu_hat;
  // Without correction C_hat(0) is about mu / h * integral f^2 = 0.6 mu^2 / rho.
  CHECK(acf.raw[0] / mu2 > 0.05);
  for (std::size_t i = 0; i < acf.size(); ++i) {
    CAPTURE(i);
    CHECK(std::fabs(acf.corrected[i]) / mu2 < 0.01);
  }
}

TEST_CASE("two-state ACF curve") {
  const RatePath path = simulate_two_state_path(TwoStateModel{}, 500.0, 41);
  const ArrivalData data = simulate_arrivals(path, 42);
  const AcfEstimate a = estimate_acf_curve(data, Kernel::epanechnikov(), {0.05, 0.2, 0.5});
  const AcfEstimate b = estimate_acf_curve(data, Kernel::epanechnikov(), {0.05, 0.2, 0.5});
  CHECK(a.corrected == b.corrected);
  CHECK(a.raw == b.raw);
  REQUIRE_FALSE(a.selection.static_rate());
  REQUIRE(a.large_grid.has_value());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(a.lags[i]);
    CHECK(a.h_used[i] == a.policy.bandwidth_for(a.lags_requested[i]));
    CHECK(a.grid_for(i).bandwidth == a.h_used[i]);
    CHECK(std::fabs(a.lags[i] - a.lags_requested[i]) <= a.grid_for(i).step / 2 + 1e-12);
    const double truth = true_acf(TwoStateModel{}, a.lags[i]);
    CHECK(std::fabs(a.corrected[i] - truth) < 0.1 * true_acf(TwoStateModel{}, 0.0));
  }

  const AcfEstimate d = estimate_acf_curve(data, Kernel::epanechnikov(), {});
  CHECK(d.size() == 50);
  CHECK(d.lags_requested.front() == doctest::Approx(d.small_grid.step));
  CHECK(d.lags_requested.back() == doctest::Approx(50.0));
  CHECK(std::is_sorted(d.lags_requested.begin(), d.lags_requested.end()));
}
