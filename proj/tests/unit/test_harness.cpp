#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "error.hpp"
#include "harness.hpp"

using namespace coxkern;

TEST_CASE("replication counts scale with rounding and a floor of one") {
  CHECK(scaled_replications(100, 0.2) == 20);
  CHECK(scaled_replications(1000, 0.2) == 200);
  CHECK(scaled_replications(1000, 1.0) == 1000);
  CHECK(scaled_replications(100, 1e-6) == 1);
  CHECK(table1_config().replications == 20);
  CHECK(table1_config(1.0).replications == 100);
  CHECK(coverage_config(CoverageModel::two_state).replications == 200);
  CHECK(table1_config().kernels.size() == 4);
  CHECK(coverage_config(CoverageModel::log_gaussian_long).horizon == 1500.0);
}

TEST_CASE("sample summaries") {
  const SampleStat s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.count == 4);
  const SampleStat one = summarize({7.0});
  CHECK(one.mean == 7.0);
  CHECK(one.sd == 0.0);
  CHECK(summarize({}).count == 0);
}

TEST_CASE("replication seeds are distinct and stable") {
  CHECK(replication_seed(1, 0) == replication_seed(1, 0));
  CHECK(replication_seed(1, 0) != replication_seed(1, 1));
  CHECK(replication_seed(1, 0) != replication_seed(2, 0));
}

TEST_CASE("config validation") {
  ExperimentConfig c = table1_config();
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = table1_config();
  c.kernels.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = coverage_config(CoverageModel::two_state);
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(run_table2(table1_config()), Error);
}

TEST_CASE("small table run is deterministic and sensible") {
  ExperimentConfig c = table1_config();
  c.replications = 2;
  c.kernels = {Kernel::epanechnikov()};
  const ExperimentReport a = run_table1(c);
  const ExperimentReport b = run_table1(c);
  REQUIRE(a.kernels.size() == 1);
  // Static replications store NaN, so compare bit patterns.
  const auto& ha = a.kernels[0].h_hat_samples;
  const auto& hb = b.kernels[0].h_hat_samples;
  REQUIRE(ha.size() == hb.size());
  CHECK(std::memcmp(ha.data(), hb.data(), ha.size() * sizeof(double)) == 0);
  CHECK(a.kernels[0].mise_h_opt.mean == b.kernels[0].mise_h_opt.mean);
  CHECK(a.kernels[0].h_opt == doctest::Approx(0.0640).epsilon(0.01));
  CHECK(a.replications == 2);
  CHECK(a.kernels[0].mise_h_opt.mean > 0.0);

  const auto json = nlohmann::json::parse(report_json(a));
  CHECK(json["replications"] == 2);
  CHECK(json["kernels"][0]["kernel"] == "epanechnikov");
}

TEST_CASE("coverage with one replication") {
  ExperimentConfig c = coverage_config(CoverageModel::two_state);
  c.replications = 1;
  c.horizon = 100.0;
  c.lags = {0.1, 1.0};
  const ExperimentReport r = run_coverage(c);
  REQUIRE(r.coverage.size() == 2);
  for (const auto& row : r.coverage) {
    CHECK((row.coverage == 0.0 || row.coverage == 1.0));
    CHECK(row.count == 1);
    CHECK(row.truth > 0.0);
  }
  const auto json = nlohmann::json::parse(report_json(r));
  CHECK(json["coverage"][0]["estimate"]["sd"].is_null());

  const auto dir = std::filesystem::temp_directory_path() / "coxkern_harness_test";
  const auto files = write_report(r, dir);
  CHECK(files.size() == 2);
  for (const auto& f : files) CHECK(std::filesystem::exists(f));
  std::filesystem::remove_all(dir);
}
