#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "error.hpp"
#include "oracles.hpp"
#include "random.hpp"
#include "simulate.hpp"

using namespace coxkern;

TEST_CASE("two-state path spends about 5/7 of the time in the fast state") {
  const TwoStateModel m;
  const RatePath path = simulate_two_state_path(m, 500.0, 1);
  double in_a = 0.0;
  for (std::size_t i = 0; i < path.segments(); ++i) {
    CHECK((path.values()[i] == m.rate_a || path.values()[i] == m.rate_b));
    if (path.values()[i] == m.rate_a) in_a += path.segment_end(i) - path.breakpoints()[i];
  }
  const double pa = 5.0 / 7.0;
  // Variance of a CTMC occupation fraction: 2 pa pb / ((k1 + k2) T).
  const double sd = std::sqrt(2.0 * pa * (1.0 - pa) / 7.0 / 500.0);
  CHECK(std::fabs(in_a / 500.0 - pa) < 4.0 * sd);
  CHECK(path.breakpoints()[0] == 0.0);
  for (std::size_t i = 1; i < path.segments(); ++i) {
    CHECK(path.breakpoints()[i] > path.breakpoints()[i - 1]);
  }
  CHECK(path.breakpoints().back() < 500.0);
}

TEST_CASE("two-state holding times are exponential") {
  const TwoStateModel m;
  const RatePath path = simulate_two_state_path(m, 2000.0, 2);
  std::vector<double> in_a, in_b;
  for (std::size_t i = 1; i + 1 < path.segments(); ++i) {
    const double d = path.segment_end(i) - path.breakpoints()[i];
    (path.values()[i] == m.rate_a ? in_a : in_b).push_back(d);
  }
  const double da = oracle::ks_statistic(in_a, [&](double x) { return 1.0 - std::exp(-m.k1 * x); });
  const double db = oracle::ks_statistic(in_b, [&](double x) { return 1.0 - std::exp(-m.k2 * x); });
  CHECK(oracle::ks_pvalue(da, in_a.size()) > 1e-3);
  CHECK(oracle::ks_pvalue(db, in_b.size()) > 1e-3);
}

TEST_CASE("two-state state at T/2 follows the stationary law") {
  const TwoStateModel m;
  const int reps = 4000;
  int in_a = 0;
  for (int r = 0; r < reps; ++r) {
    const RatePath path = simulate_two_state_path(m, 2.0, derive_seed(5, 0, r));
    in_a += path.value_at(1.0) == m.rate_a;
  }
  const double p = 5.0 / 7.0;
  CHECK(std::fabs(in_a / double(reps) - p) < 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("indistinguishable states give a constant path") {
  const RatePath path = simulate_two_state_path(TwoStateModel{3.0, 3.0, 700.0, 700.0}, 50.0, 3);
  for (double v : path.values()) CHECK(v == 700.0);
  CHECK(path.time_average() == doctest::Approx(700.0));
}

TEST_CASE("simulators are deterministic in the seed") {
  const RatePath a = simulate_two_state_path(TwoStateModel{}, 100.0, 42);
  const RatePath b = simulate_two_state_path(TwoStateModel{}, 100.0, 42);
  CHECK(std::vector<double>(a.breakpoints().begin(), a.breakpoints().end()) ==
        std::vector<double>(b.breakpoints().begin(), b.breakpoints().end()));
  const LogGaussianModel lg{1000.0, 1.0, 6.0};
  const RatePath c = simulate_log_gaussian_path(lg, 20.0, 9);
  const RatePath d = simulate_log_gaussian_path(lg, 20.0, 9);
  CHECK(std::vector<double>(c.values().begin(), c.values().end()) ==
        std::vector<double>(d.values().begin(), d.values().end()));
  const ArrivalData x = simulate_arrivals(a, 7);
  const ArrivalData y = simulate_arrivals(a, 7);
  CHECK(std::vector<double>(x.times().begin(), x.times().end()) ==
        std::vector<double>(y.times().begin(), y.times().end()));
}

TEST_CASE("log-Gaussian path mean is near M e^(1/2)") {
  const LogGaussianModel lg{1000.0, 1.0, 6.0};
  const double T = 300.0;
  const RatePath path = simulate_log_gaussian_path(lg, T, 17);
  // Time-average variance ~ (2/T) * integral of C; integral of C < 1e6 here.
  const double sd = std::sqrt(2.0 * 1.0e6 / T);
  CHECK(std::fabs(path.time_average() - 1000.0 * std::exp(0.5)) < 4.0 * sd);
  CHECK(lg.covariance(lg.effective_step()) >= 0.99 * lg.covariance(0.0) - 1e-15);
}

TEST_CASE("Gaussian skeleton reproduces the target autocovariance") {
  const LogGaussianModel lg{1000.0, 1.0, 0.5};
  const double eps = 0.05;
  auto acvf = [&](std::size_t j) { return lg.covariance(static_cast<double>(j) * eps); };
  for (auto method : {EmbeddingMethod::circulant, EmbeddingMethod::cholesky}) {
    CAPTURE(static_cast<int>(method));
    const std::size_t n = method == EmbeddingMethod::cholesky ? 256 : 4096;
    const int reps = method == EmbeddingMethod::cholesky ? 400 : 200;
    std::vector<double> acc(11, 0.0), acc2(11, 0.0);
    std::vector<double> first;
    for (int r = 0; r < reps; ++r) {
      Rng rng = make_rng(derive_seed(99, 3, r));
      const auto w = sample_stationary_gaussian(n, acvf, rng, SkeletonOptions{method, 4096});
      REQUIRE(w.size() == n);
      first.push_back(w[0]);
      for (std::size_t k = 0; k <= 10; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j + k < n; ++j) s += w[j] * w[j + k];
        const double v = s / static_cast<double>(n - k);
        acc[k] += v;
        acc2[k] += v * v;
      }
    }
    for (std::size_t k = 0; k <= 10; ++k) {
      const double mean = acc[k] / reps;
      const double se = std::sqrt((acc2[k] / reps - mean * mean) / reps);
      CAPTURE(k);
      CHECK(std::fabs(mean - acvf(k)) < 4.0 * se + 1e-12);
    }
    const double d = oracle::ks_statistic(first, oracle::normal_cdf);
    CHECK(oracle::ks_pvalue(d, first.size()) > 1e-3);
  }
}

TEST_CASE("single-segment Poisson counts pass a chi-square test") {
  const double lambda = 20.0;
  const RatePath path({0.0}, {lambda}, 1.0);
  const int reps = 10000;
  std::map<std::size_t, int> counts;
  std::vector<double> positions;
  for (int r = 0; r < reps; ++r) {
    const ArrivalData d = simulate_arrivals(path, derive_seed(123, seed_stream::arrivals, r));
    ++counts[d.size()];
    if (r < 200) positions.insert(positions.end(), d.times().begin(), d.times().end());
  }
  // Bins: <= 12, 13 .. 28 individually, >= 29.
  auto pmf = [&](std::size_t k) {
    return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
  };
  std::vector<double> observed, expected;
  double lo_p = 0.0;
  int lo_n = 0;
  for (std::size_t k = 0; k <= 12; ++k) {
    lo_p += pmf(k);
    lo_n += counts[k];
  }
  observed.push_back(lo_n);
  expected.push_back(lo_p * reps);
  double used = lo_p;
  for (std::size_t k = 13; k <= 28; ++k) {
    observed.push_back(counts[k]);
    expected.push_back(pmf(k) * reps);
    used += pmf(k);
  }
  int hi_n = 0;
  for (const auto& [k, c] : counts) {
    if (k >= 29) hi_n += c;
  }
  observed.push_back(hi_n);
  expected.push_back((1.0 - used) * reps);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    chi2 += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  CHECK(oracle::chi_square_sf(chi2, static_cast<double>(observed.size() - 1)) > 1e-3);
  const double d = oracle::ks_statistic(positions, [](double x) { return x; });
  CHECK(oracle::ks_pvalue(d, positions.size()) > 1e-3);
}

TEST_CASE("arrival examples") {
  const ArrivalData none = simulate_arrivals(RatePath({0.0}, {0.0}, 10.0), 1);
  CHECK(none.size() == 0);
  const ArrivalData flat = simulate_arrivals(constant_path(ConstantModel{500.0}, 500.0), 2);
  CHECK(std::fabs(mean_rate(flat) - 500.0) < 3.0);
  const RatePath ts = simulate_two_state_path(TwoStateModel{}, 500.0, 3);
  const ArrivalData two = simulate_arrivals(ts, 4);
  // sd of K/T is about sqrt(2 C(0) / (7 T)) ~ 6.5 from the rate path alone.
  CHECK(std::fabs(mean_rate(two) - 828.57) < 30.0);
  for (std::size_t i = 1; i < two.size(); ++i) CHECK(two.times()[i] >= two.times()[i - 1]);
}

TEST_CASE("closed-form mean and autocovariance") {
  const RateModel ts = TwoStateModel{};
  CHECK(true_mean(ts) == doctest::Approx(828.5714285714));
  CHECK(true_acf(ts, 0.0) == doctest::Approx(360000.0 * 10.0 / 49.0));
  CHECK(true_acf_slope_at_zero(ts) == doctest::Approx(-7.0 * 360000.0 * 10.0 / 49.0));
  for (double t : {0.01, 0.3, 1.0, 4.0}) {
    CHECK(true_acf(ts, t) == doctest::Approx(true_acf(ts, 0.0) * std::exp(-7.0 * t)).epsilon(1e-14));
  }
  const RateModel lg = LogGaussianModel{1000.0, 1.0, 6.0};
  CHECK(true_mean(lg) == doctest::Approx(1000.0 * std::exp(0.5)));
  CHECK(true_acf(lg, 0.0) == doctest::Approx(1e6 * (std::exp(2.0) - std::exp(1.0))));
  CHECK(true_acf(lg, 1e4) < 1e-12 * true_acf(lg, 0.0));
  CHECK(true_acf(ConstantModel{500.0}, 0.3) == 0.0);
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(validate(TwoStateModel{-1.0, 5.0, 1000.0, 400.0}), Error);
  CHECK_THROWS_AS(validate(LogGaussianModel{1000.0, 0.0, 6.0}), Error);
  CHECK_THROWS_AS(simulate_path(TwoStateModel{}, 0.0, 1), Error);
}
