#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "rate.hpp"
#include "simulate.hpp"

namespace coxkern {

struct ExperimentConfig {
  RateModel model = TwoStateModel{};
  std::vector<Kernel> kernels;
  std::size_t replications = 20;
  double horizon = 500.0;
  double rho = 5.0;
  std::vector<double> lags;
  double alpha = 0.05;
  std::uint64_t seed = 20100601;
  /// Fraction of the reference replication count; informational once
  /// replications is set.
  double scale = 0.2;
  double r_max = 0.0;
  SlopeOptions slope;

  void validate() const;
};

/// Reference replication counts: 100 for the bandwidth tables, 1000 for coverage
/// and the bandwidth histogram.
inline constexpr std::size_t kTableReplications = 100;
inline constexpr std::size_t kCoverageReplications = 1000;

std::size_t scaled_replications(std::size_t base_count, double scale);

/// Two-state model, T = 500, all four kernels.
ExperimentConfig table1_config(double scale = 0.2);
/// Log-Gaussian H = 6, a = 1, M = 1000, T = 1500, all four kernels.
ExperimentConfig table2_config(double scale = 0.2);

enum class CoverageModel { two_state, log_gaussian_short, log_gaussian_long };
/// Coverage studies (Epanechnikov kernel, lags 0.01 .. 10): two-state with
/// T = 500; log-Gaussian H = 6, a = 1 or H = 0.5, a = 20 with M = 1000 and
/// T = 1500.
ExperimentConfig coverage_config(CoverageModel which, double scale = 0.2);
/// Two-state, Epanechnikov only.
ExperimentConfig histogram_config(double scale = 0.2);

struct SampleStat {
  double mean = 0.0;
  double sd = 0.0;  // 0 with fewer than two samples
  std::size_t count = 0;
};

SampleStat summarize(const std::vector<double>& xs);

struct KernelSummary {
  std::string kernel;
  double h_opt = 0.0;  // from the true mu and C'(0+)
  SampleStat h_hat;
  std::size_t static_count = 0;
  SampleStat mise_h_opt;
  SampleStat mise_h_hat;
  SampleStat mise_half;
  SampleStat mise_double;
  std::vector<double> h_hat_samples;  // replication order; NaN when static
};

struct CoverageRow {
  double lag = 0.0;
  double truth = 0.0;
  double coverage = 0.0;
  double coverage_sd = 0.0;  // sqrt(p (1 - p) / n)
  std::size_t count = 0;
  SampleStat estimate;
  double mean_variance = 0.0;  // mean of V_hat over replications
};

struct ExperimentReport {
  std::string name;
  std::string model;
  double horizon = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double scale = 0.0;
  double alpha = 0.0;
  double r_max = 0.0;
  std::optional<double> skeleton_step;
  double wall_seconds = 0.0;
  std::vector<KernelSummary> kernels;
  std::vector<CoverageRow> coverage;
};

/// Bandwidth and MISE study on the two-state model.
ExperimentReport run_table1(const ExperimentConfig& config);
/// Bandwidth and MISE study on a log-Gaussian model.
ExperimentReport run_table2(const ExperimentConfig& config);
/// Fraction of replications whose interval covers the true ACF, per lag, for
/// the first kernel of the config.
ExperimentReport run_coverage(const ExperimentConfig& config);
/// h_hat per replication for the first kernel plus the true h_opt.
ExperimentReport run_hopt_histogram(const ExperimentConfig& config);

/// Seeds of replication i: the path and arrival seeds both derive from
/// derive_seed(master, seed_stream::replication, i).
std::uint64_t replication_seed(std::uint64_t master, std::size_t i);

/// Writes <name>.csv (one row per kernel, lag or replication) and
/// <name>.json into dir; returns the paths.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir);

std::string report_json(const ExperimentReport& report);

}  // namespace coxkern
