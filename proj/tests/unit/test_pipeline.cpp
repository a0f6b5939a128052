#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "error.hpp"
#include "pipeline.hpp"
#include "simulate.hpp"

using namespace coxkern;
namespace fs = std::filesystem;

namespace {

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("lag spec parsing") {
  CHECK(LagSpec::parse("log:12").log_count == 12);
  CHECK(LagSpec::parse("log:12").lags.empty());
  const auto explicit_lags = LagSpec::parse("0.1, 0.5,2");
  REQUIRE(explicit_lags.lags.size() == 3);
  CHECK(explicit_lags.lags[1] == 0.5);
  CHECK_THROWS_AS(LagSpec::parse("log:0"), Error);
  CHECK_THROWS_AS(LagSpec::parse("log:2.5"), Error);
  CHECK_THROWS_AS(LagSpec::parse("0.1,x"), Error);
  CHECK_THROWS_AS(LagSpec::parse("-1"), Error);
}

TEST_CASE("kernel resolution") {
  CHECK(resolve_kernel("quartic").name() == "quartic");
  CHECK_THROWS_AS(resolve_kernel("cosine"), Error);
  CHECK_THROWS_AS(resolve_kernel("table:/nonexistent/kernel.txt"), Error);
}

TEST_CASE("analysis writes rate, acf and metadata") {
  const fs::path dir = fs::temp_directory_path() / "coxkern_pipeline_test";
  fs::remove_all(dir);
  const RatePath path = simulate_two_state_path(TwoStateModel{}, 500.0, 3);
  const ArrivalData data = simulate_arrivals(path, 4);
  const fs::path input = dir / "in.txt";
  fs::create_directories(dir);
  io::write_arrivals(input, data.times(), io::Format::text);

  AnalysisConfig cfg;
  cfg.input = input;
  cfg.horizon = 500.0;
  cfg.lags = LagSpec::parse("log:8");
  cfg.out_dir = dir / "out";
  const AnalysisResult r = run_analysis(cfg);
  CHECK(r.events == data.size());
  CHECK(r.mu_hat == doctest::Approx(mean_rate(data)));
  REQUIRE(r.acf.has_value());
  REQUIRE(r.band.has_value());
  CHECK(r.acf->size() == 8);
  CHECK(r.band->size() == 8);
  CHECK(r.outputs.size() == 3);

  CHECK(first_line(cfg.out_dir / "rate.csv") == "t,lambda_hat");
  const std::string header = first_line(cfg.out_dir / "acf.csv");
  for (const char* col : {"t,", "raw", "corrected", "h_used", "variance", "lower", "upper"}) {
    CHECK(header.find(col) != std::string::npos);
  }
  CHECK(line_count(cfg.out_dir / "acf.csv") == 9);

  std::ifstream meta_in(cfg.out_dir / "metadata.json");
  const auto meta = nlohmann::json::parse(meta_in);
  CHECK(meta["events"] == data.size());
  CHECK(meta["kernel"] == "epanechnikov");
  CHECK(meta["static_rate"] == false);
  CHECK(meta["acf"]["lags"] == 8);
  CHECK(meta["ci"]["alpha"] == 0.05);
  CHECK(meta["ci"]["r_max"].is_null());

  Stages only_rate{true, false, false};
  AnalysisConfig fixed = cfg;
  fixed.bandwidth = 0.05;
  fixed.out_dir = dir / "rate_only";
  const AnalysisResult r2 = run_analysis(fixed, only_rate);
  CHECK(r2.rate_bandwidth == 0.05);
  CHECK_FALSE(r2.acf.has_value());
  CHECK_FALSE(fs::exists(fixed.out_dir / "acf.csv"));
  fs::remove_all(dir);
}

TEST_CASE("static input is reported") {
  const ArrivalData data = simulate_arrivals(constant_path(ConstantModel{500.0}, 200.0), 5);
  AnalysisConfig cfg;
  cfg.out_dir = fs::temp_directory_path() / "coxkern_pipeline_static";
  cfg.lags = LagSpec::parse("0.1,1,10");
  const AnalysisResult r = run_analysis(data, cfg);
  CHECK(r.selection.static_rate());
  CHECK(r.rate_bandwidth == doctest::Approx(r.selection.h_pilot));
  bool warned = false;
  for (const auto& w : r.warnings) warned = warned || w.find("no significant rate fluctuation") != std::string::npos;
  CHECK(warned);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("analysis errors carry codes") {
  AnalysisConfig cfg;
  cfg.input = "/nonexistent/arrivals.txt";
  cfg.out_dir = fs::temp_directory_path() / "coxkern_pipeline_err";
  try {
    run_analysis(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_failure);
  }
}
