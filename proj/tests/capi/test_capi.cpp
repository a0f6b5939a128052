#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "coxkern/coxkern.h"

namespace fs = std::filesystem;

TEST_CASE("status names and errors") {
  CHECK(std::string(cox_status_name(COX_OK)) == "ok");
  CHECK(std::strlen(cox_version()) > 0);
  cox_kernel* k = nullptr;
  CHECK(cox_kernel_create("gaussian", &k) == COX_INVALID_ARGUMENT);
  CHECK(k == nullptr);
  CHECK(std::string(cox_last_error()).find("gaussian") != std::string::npos);
  CHECK(cox_kernel_create(nullptr, &k) == COX_INVALID_ARGUMENT);
  CHECK(cox_kernel_create("uniform", nullptr) == COX_INVALID_ARGUMENT);
  cox_kernel_free(nullptr);
  cox_arrivals_free(nullptr);
}

TEST_CASE("kernel handle") {
  cox_kernel* k = nullptr;
  REQUIRE(cox_kernel_create("quartic", &k) == COX_OK);
  CHECK(std::string(cox_kernel_name(k)) == "quartic");
  CHECK(cox_kernel_support(k) == 1.0);
  CHECK(cox_kernel_density(k, 0.0) == doctest::Approx(15.0 / 16.0));
  CHECK(cox_kernel_squared_integral(k) == doctest::Approx(5.0 / 7.0));
  CHECK(cox_kernel_gamma(k) == doctest::Approx(-355.0 / 1848.0));
  double m = 0.0;
  CHECK(cox_kernel_abs_moment(k, 3.0, 1.0, &m) == COX_OK);
  CHECK(m == doctest::Approx(3.0));
  CHECK(cox_kernel_abs_moment(k, 3.0, -1.0, &m) == COX_INVALID_BANDWIDTH);
  cox_kernel_free(k);

  const double u[] = {-1.0, 0.0, 1.0}, f[] = {0.0, 1.0, 0.0};
  REQUIRE(cox_kernel_from_table(u, f, 3, &k) == COX_OK);
  CHECK(cox_kernel_gamma(k) == doctest::Approx(-0.2).epsilon(1e-6));
  cox_kernel_free(k);
  const double bad[] = {0.0, 3.0, 0.0};
  CHECK(cox_kernel_from_table(u, bad, 3, &k) != COX_OK);
}

TEST_CASE("arrival handles") {
  const double times[] = {0.5, 1.0, 2.0};
  cox_arrivals* a = nullptr;
  REQUIRE(cox_arrivals_create(times, 3, 4.0, &a) == COX_OK);
  CHECK(cox_arrivals_count(a) == 3);
  CHECK(cox_arrivals_horizon(a) == 4.0);
  CHECK(cox_arrivals_mean_rate(a) == 0.75);
  CHECK(cox_arrivals_times(a)[2] == 2.0);
  const fs::path p = fs::temp_directory_path() / "coxkern_capi.f64";
  CHECK(cox_arrivals_write(a, p.c_str(), COX_FORMAT_BINARY_F64) == COX_OK);
  cox_arrivals* b = nullptr;
  REQUIRE(cox_arrivals_read(p.c_str(), COX_FORMAT_BINARY_F64, 0.0, &b) == COX_OK);
  CHECK(cox_arrivals_horizon(b) == 2.0);
  CHECK(cox_arrivals_warning_count(b) == 0);
  cox_arrivals_free(b);
  REQUIRE(cox_arrivals_read(p.c_str(), COX_FORMAT_BINARY_F64, 10.0, &b) == COX_OK);
  CHECK(cox_arrivals_warning_count(b) == 1);
  CHECK(cox_arrivals_warning(b, 5) == nullptr);
  cox_arrivals_free(b);
  cox_arrivals_free(a);
  fs::remove(p);

  const double unsorted[] = {2.0, 1.0};
  CHECK(cox_arrivals_create(unsorted, 2, 4.0, &a) == COX_INVALID_DATA);
  CHECK(cox_arrivals_create(times, 3, 1.0, &a) == COX_INVALID_DATA);
  CHECK(cox_arrivals_read("/nonexistent/x.txt", COX_FORMAT_TEXT, 0.0, &a) == COX_IO_FAILURE);
}

TEST_CASE("simulate, estimate and intervals through handles") {
  cox_model model;
  cox_model_defaults(COX_MODEL_TWO_STATE, &model);
  double mean = 0.0, slope = 0.0, c0 = 0.0;
  REQUIRE(cox_model_true_mean(&model, &mean) == COX_OK);
  REQUIRE(cox_model_true_slope(&model, &slope) == COX_OK);
  REQUIRE(cox_model_true_acf(&model, 0.0, &c0) == COX_OK);
  CHECK(mean == doctest::Approx(828.5714285714));
  CHECK(slope == doctest::Approx(-7.0 * c0));

  cox_arrivals* data = nullptr;
  cox_rate_path* path = nullptr;
  REQUIRE(cox_simulate(&model, 200.0, 11, &data, &path) == COX_OK);
  cox_arrivals* again = nullptr;
  REQUIRE(cox_simulate(&model, 200.0, 11, &again, nullptr) == COX_OK);
  REQUIRE(cox_arrivals_count(again) == cox_arrivals_count(data));
  CHECK(std::memcmp(cox_arrivals_times(again), cox_arrivals_times(data),
                    cox_arrivals_count(data) * sizeof(double)) == 0);
  cox_arrivals_free(again);
  CHECK(cox_rate_path_segments(path) > 10);
  CHECK(cox_rate_path_breakpoints(path)[0] == 0.0);

  cox_kernel* k = nullptr;
  REQUIRE(cox_kernel_create("epanechnikov", &k) == COX_OK);
  double h_opt = 0.0;
  REQUIRE(cox_optimal_bandwidth(mean, slope, k, &h_opt) == COX_OK);
  CHECK(h_opt == doctest::Approx(0.0640).epsilon(0.01));
  CHECK(cox_optimal_bandwidth(mean, 1.0, k, &h_opt) != COX_OK);

  cox_bandwidth_selection sel;
  REQUIRE(cox_select_bandwidth(data, k, 5.0, &sel) == COX_OK);
  CHECK(sel.h_pilot == doctest::Approx(5.0 / sel.mu_hat));
  CHECK((sel.static_rate ? std::isnan(sel.h_opt) : sel.h_opt > 0.0));

  cox_rate_estimate* rate = nullptr;
  REQUIRE(cox_estimate_rate(data, k, 0.064, 0.0, &rate) == COX_OK);
  CHECK(cox_rate_bandwidth(rate) == 0.064);
  CHECK(cox_rate_step(rate) == doctest::Approx(0.0064));
  CHECK(cox_rate_time_at(rate, 10) == doctest::Approx(0.064));
  double mise = 0.0;
  REQUIRE(cox_empirical_mise(rate, path, cox_arrivals_mean_rate(data), &mise) == COX_OK);
  CHECK(mise > 0.0);
  CHECK(mise < 0.1);
  double v = -1.0;
  REQUIRE(cox_variance_estimate(rate, cox_arrivals_mean_rate(data), 0.2, 0.0, &v) == COX_OK);
  CHECK(v >= 0.0);
  CHECK(cox_variance_estimate(rate, cox_arrivals_mean_rate(data), 500.0, 0.0, &v) == COX_LAG_OUT_OF_RANGE);
  CHECK(cox_estimate_rate(data, k, 150.0, 0.0, &rate) == COX_BANDWIDTH_TOO_LARGE);
  cox_rate_free(rate);

  const double lags[] = {0.05, 0.2, 1.0};
  cox_acf_result* acf = nullptr;
  REQUIRE(cox_estimate_acf(data, k, lags, 3, 5.0, &acf) == COX_OK);
  REQUIRE(cox_acf_size(acf) == 3);
  CHECK(cox_acf_variance(acf) == nullptr);
  REQUIRE(cox_acf_confidence(acf, 0.05, 0.0) == COX_OK);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(cox_acf_lower(acf)[i] <= cox_acf_corrected(acf)[i]);
    CHECK(cox_acf_upper(acf)[i] >= cox_acf_corrected(acf)[i]);
  }
  CHECK(cox_acf_confidence(acf, 2.0, 0.0) == COX_INVALID_ARGUMENT);
  cox_acf_free(acf);

  double q = 0.0, lo = 0.0, hi = 0.0;
  CHECK(cox_normal_quantile(0.975, &q) == COX_OK);
  CHECK(q == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(cox_confidence_interval(1.0, 4.0, 0.05, &lo, &hi) == COX_OK);
  CHECK(hi - lo == doctest::Approx(4.0 * q));

  cox_kernel_free(k);
  cox_rate_path_free(path);
  cox_arrivals_free(data);
}

namespace {

int warning_count = 0;
void count_warning(const char*, void* user) { ++*static_cast<int*>(user); }

}  // namespace

TEST_CASE("analysis and experiments") {
  cox_model model;
  cox_model_defaults(COX_MODEL_CONSTANT, &model);
  cox_arrivals* data = nullptr;
  REQUIRE(cox_simulate(&model, 100.0, 3, &data, nullptr) == COX_OK);
  const fs::path dir = fs::temp_directory_path() / "coxkern_capi_analysis";
  fs::create_directories(dir);
  const std::string input = (dir / "in.txt").string();
  REQUIRE(cox_arrivals_write(data, input.c_str(), COX_FORMAT_TEXT) == COX_OK);
  cox_arrivals_free(data);

  cox_analysis_config cfg;
  cox_analysis_config_defaults(&cfg);
  cfg.input = input.c_str();
  cfg.horizon = 100.0;
  cfg.lags = "0.1,1";
  const std::string out = (dir / "out").string();
  cfg.out_dir = out.c_str();
  cfg.on_warning = count_warning;
  cfg.user = &warning_count;
  cox_analysis_summary summary;
  REQUIRE(cox_run_analysis(&cfg, &summary) == COX_OK);
  CHECK(summary.lags == 2);
  CHECK(summary.static_rate == 1);
  CHECK(std::isnan(summary.h_opt));
  CHECK(warning_count >= 1);
  CHECK(fs::exists(dir / "out" / "metadata.json"));
  cfg.lags = "log:x";
  CHECK(cox_run_analysis(&cfg, &summary) == COX_INVALID_ARGUMENT);

  cox_experiment_config ec;
  cox_experiment_config_defaults(COX_EXPERIMENT_COVERAGE, &ec);
  ec.replications = 1;
  ec.lags = "0.1";
  cox_experiment_report* report = nullptr;
  REQUIRE(cox_run_experiment(&ec, &report) == COX_OK);
  const auto json = nlohmann::json::parse(cox_experiment_report_json(report));
  CHECK(json["replications"] == 1);
  CHECK(json["coverage"].size() == 1);
  CHECK(cox_experiment_report_write(report, out.c_str()) == COX_OK);
  cox_experiment_report_free(report);
  fs::remove_all(dir);
}
