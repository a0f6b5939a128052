#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acf.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "varci.hpp"

namespace coxkern {

/// Either explicit lags or a count of log-spaced default lags.
struct LagSpec {
  std::vector<double> lags;
  std::size_t log_count = 50;

  /// "log:N" or a comma-separated list of lags.
  static LagSpec parse(std::string_view text);
};

/// A built-in kernel name, or "table:<path>" for a tabulated kernel file.
Kernel resolve_kernel(std::string_view spec);

struct AnalysisConfig {
  std::filesystem::path input;
  io::Format format = io::Format::text;
  std::optional<double> horizon;
  std::string kernel = "epanechnikov";
  double rho = 5.0;
  double alpha = 0.05;
  LagSpec lags;
  double grid_step = 0.0;  // <= 0: h / 10 on each grid
  double r_max = 0.0;      // <= 0: full r range in the variance integral
  /// Fixed bandwidth for the rate output; empty selects h_opt (pilot when
  /// the rate looks static).
  std::optional<double> bandwidth;
  std::filesystem::path out_dir = ".";
};

struct Stages {
  bool rate = true;
  bool acf = true;
  bool ci = true;
};

struct AnalysisResult {
  std::size_t events = 0;
  double horizon = 0.0;
  double mu_hat = 0.0;
  BandwidthSelection selection;
  double rate_bandwidth = 0.0;
  std::optional<AcfEstimate> acf;
  std::optional<CiBand> band;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> outputs;
};

/// Ingests the input and writes the requested outputs into out_dir:
/// rate.csv, acf.csv (with CI columns when requested) and metadata.json.
AnalysisResult run_analysis(const AnalysisConfig& config, const Stages& stages = {});

/// Same, on data already in memory (input path is only recorded).
AnalysisResult run_analysis(const ArrivalData& data, const AnalysisConfig& config,
                            const Stages& stages = {},
                            std::vector<std::string> warnings = {});

}  // namespace coxkern
