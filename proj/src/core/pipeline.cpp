#include "pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace coxkern {

namespace {

double parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    fail(ErrorCode::invalid_argument, "cannot parse '" + std::string(s) + "' as a number");
  }
  return x;
}

nlohmann::json nullable(std::optional<double> x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

double finite_or_nan(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::quiet_NaN(); }

void write_acf_csv(const std::filesystem::path& path, const AcfEstimate& acf, const CiBand* band) {
  const std::size_t n = acf.size();
  std::size_t ref = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (acf.lags[i] < acf.lags[ref]) ref = i;
  }
  const double norm = n ? acf.corrected[ref] : 0.0;
  auto scaled = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = norm != 0.0 ? v[i] / norm : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  };
  std::vector<double> log_t(n), log_c(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_t[i] = acf.lags[i] > 0.0 ? std::log10(acf.lags[i]) : std::numeric_limits<double>::quiet_NaN();
    log_c[i] = finite_or_nan(acf.corrected[i] > 0.0 ? std::log10(acf.corrected[i])
                                                    : std::numeric_limits<double>::quiet_NaN());
  }
  const auto raw_n = scaled(acf.raw);
  const auto cor_n = scaled(acf.corrected);

  std::vector<std::string> header{"t", "t_requested", "raw", "corrected", "h_used"};
  std::vector<std::span<const double>> cols{acf.lags, acf.lags_requested, acf.raw, acf.corrected,
                                            acf.h_used};
  std::vector<double> low_n, up_n;
  if (band) {
    header.insert(header.end(), {"variance", "lower", "upper"});
    cols.insert(cols.end(), {band->variance, band->lower, band->upper});
  }
  header.insert(header.end(), {"raw_normalized", "corrected_normalized"});
  cols.insert(cols.end(), {raw_n, cor_n});
  if (band) {
    low_n = scaled(band->lower);
    up_n = scaled(band->upper);
    header.insert(header.end(), {"lower_normalized", "upper_normalized"});
    cols.insert(cols.end(), {low_n, up_n});
  }
  header.insert(header.end(), {"log10_t", "log10_corrected"});
  cols.insert(cols.end(), {log_t, log_c});
  io::write_csv(path, header, cols);
}

}  // namespace

LagSpec LagSpec::parse(std::string_view text) {
  LagSpec spec;
  if (text.rfind("log:", 0) == 0) {
    const double n = parse_number(text.substr(4));
    if (!(n >= 1.0) || n != std::floor(n)) fail(ErrorCode::invalid_argument, "log:N needs a positive integer");
    spec.log_count = static_cast<std::size_t>(n);
    return spec;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    spec.lags.push_back(parse_number(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (spec.lags.empty()) fail(ErrorCode::invalid_argument, "empty lag list");
  for (double t : spec.lags) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::invalid_argument, "lags must be finite and nonnegative");
  }
  return spec;
}

Kernel resolve_kernel(std::string_view spec) {
  if (spec.rfind("table:", 0) == 0) return Kernel::load_table(std::string(spec.substr(6)));
  return Kernel::by_name(spec);
}

AnalysisResult run_analysis(const AnalysisConfig& config, const Stages& stages) {
  auto ingested = io::read_arrivals(config.input, config.format, config.horizon);
  return run_analysis(ingested.data, config, stages, std::move(ingested.warnings));
}

AnalysisResult run_analysis(const ArrivalData& data, const AnalysisConfig& config,
                            const Stages& stages, std::vector<std::string> warnings) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail(ErrorCode::invalid_argument, "alpha must be in (0, 1)");
  if (!(config.rho > 0.0)) fail(ErrorCode::invalid_argument, "rho must be positive");
  if (data.empty()) fail(ErrorCode::empty_data, "no events");
  const Kernel kernel = resolve_kernel(config.kernel);
  io::ensure_directory(config.out_dir);

  AnalysisResult result;
  result.events = data.size();
  result.horizon = data.horizon();
  result.mu_hat = mean_rate(data);
  result.warnings = std::move(warnings);

  AcfOptions options;
  options.rho = config.rho;
  options.grid_step = config.grid_step;
  options.slope.grid_step = config.grid_step;
  if (config.lags.lags.empty()) options.default_lag_count = config.lags.log_count;

  // The ACF stage builds the pilot grid and the selection; reuse them for the
  // rate output when possible.
  if (stages.acf || stages.ci) {
    result.acf = estimate_acf_curve(data, kernel, config.lags.lags, options);
    result.selection = result.acf->selection;
  } else {
    const RateEstimate pilot =
        estimate_rate(data, kernel, pilot_bandwidth(data, config.rho), config.grid_step);
    result.selection = select_bandwidth(pilot, result.mu_hat, config.rho, options.slope);
  }
  if (result.selection.static_rate()) {
    result.warnings.push_back(
        "no significant rate fluctuation detected; using the pilot bandwidth throughout");
  }

  result.rate_bandwidth = config.bandwidth ? *config.bandwidth
                                           : result.selection.h_opt.value_or(result.selection.h_pilot);
  if (stages.rate) {
    const RateEstimate* grid = nullptr;
    std::optional<RateEstimate> own;
    if (result.acf) {
      if (result.acf->large_grid && result.acf->large_grid->bandwidth == result.rate_bandwidth) {
        grid = &*result.acf->large_grid;
      } else if (result.acf->small_grid.bandwidth == result.rate_bandwidth) {
        grid = &result.acf->small_grid;
      }
    }
    if (!grid) {
      own = estimate_rate(data, kernel, result.rate_bandwidth, config.grid_step);
      grid = &*own;
    }
    std::vector<double> t(grid->size());
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = grid->time_at(j);
    const auto path = config.out_dir / "rate.csv";
    io::write_csv(path, {"t", "lambda_hat"}, {t, grid->values});
    result.outputs.push_back(path);
  }

  if (stages.ci) result.band = confidence_band(*result.acf, config.alpha, config.r_max);
  if (result.acf) {
    const auto path = config.out_dir / "acf.csv";
    write_acf_csv(path, *result.acf, result.band ? &*result.band : nullptr);
    result.outputs.push_back(path);
  }

  const auto& sel = result.selection;
  nlohmann::json meta;
  meta["input"] = config.input.string();
  meta["format"] = io::format_name(config.format);
  meta["events"] = result.events;
  meta["horizon"] = result.horizon;
  meta["mu_hat"] = result.mu_hat;
  meta["kernel"] = kernel.name();
  meta["rho"] = config.rho;
  meta["h_pilot"] = sel.h_pilot;
  meta["static_rate"] = sel.static_rate();
  meta["h_opt"] = nullable(sel.h_opt);
  meta["cprime0"] = {{"slope", sel.slope.slope}, {"standard_error", sel.slope.standard_error}};
  meta["rate_bandwidth"] = result.rate_bandwidth;
  meta["grid_step"] = config.grid_step > 0.0 ? nlohmann::json(config.grid_step) : nlohmann::json("h/10");
  if (result.acf) {
    const auto& p = result.acf->policy;
    meta["acf"] = {{"lags", result.acf->size()},
                   {"small_bandwidth", p.small_bandwidth},
                   {"large_bandwidth", p.large_bandwidth},
                   {"switch_lag", p.switch_lag},
                   {"lag_rounding", "nearest multiple of the grid step of the bandwidth used; t holds the rounded lag"},
                   {"normalized_by_lag", result.acf->size() ? *std::min_element(result.acf->lags.begin(), result.acf->lags.end()) : 0.0}};
  }
  if (result.band) {
    meta["ci"] = {{"alpha", config.alpha},
                  {"r_max", config.r_max > 0.0 ? nlohmann::json(config.r_max) : nlohmann::json(nullptr)}};
  }
  meta["warnings"] = result.warnings;
  std::vector<std::string> names;
  for (const auto& p : result.outputs) names.push_back(p.filename().string());
  names.push_back("metadata.json");
  meta["outputs"] = names;
  const auto meta_path = config.out_dir / "metadata.json";
  io::write_text(meta_path, meta.dump(2) + "\n");
  result.outputs.push_back(meta_path);
  return result;
}

}  // namespace coxkern
