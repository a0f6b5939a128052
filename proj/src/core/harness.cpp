#include "harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <limits>

#include "acf.hpp"
#include "error.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "varci.hpp"

namespace coxkern {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<double> kTable3Lags{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};

std::vector<Kernel> all_kernels() {
  return {Kernel::uniform(), Kernel::epanechnikov(), Kernel::triangular(), Kernel::quartic()};
}

ArrivalData replicate(const ExperimentConfig& config, std::size_t i, std::optional<RatePath>* keep) {
  const std::uint64_t s = replication_seed(config.seed, i);
  RatePath path = simulate_path(config.model, config.horizon, derive_seed(s, seed_stream::rate_path, 0));
  ArrivalData data = simulate_arrivals(path, derive_seed(s, seed_stream::arrivals, 0));
  if (keep) *keep = std::move(path);
  return data;
}

ExperimentReport blank_report(const ExperimentConfig& config, std::string name) {
  ExperimentReport r;
  r.name = std::move(name);
  r.model = describe(config.model);
  r.horizon = config.horizon;
  r.replications = config.replications;
  r.seed = config.seed;
  r.scale = config.scale;
  r.alpha = config.alpha;
  r.r_max = config.r_max;
  if (const auto* lg = std::get_if<LogGaussianModel>(&config.model)) r.skeleton_step = lg->effective_step();
  return r;
}

double analytic_h_opt(const RateModel& model, const Kernel& kernel) {
  const double slope = true_acf_slope_at_zero(model);
  return slope < 0.0 ? optimal_bandwidth(true_mean(model), slope, kernel) : kNaN;
}

std::vector<double> finite_only(const std::vector<double>& xs) {
  std::vector<double> out;
  for (double x : xs) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentReport run_bandwidth_table(const ExperimentConfig& config, std::string name) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report = blank_report(config, std::move(name));
  const std::size_t nk = config.kernels.size();
  const std::size_t n = config.replications;

  // Per kernel, per replication: h_hat, MISE at h_opt, h_hat, h_opt / 2, 2 h_opt.
  struct Cell {
    double h_hat = kNaN, at_opt = kNaN, at_hat = kNaN, at_half = kNaN, at_double = kNaN;
  };
  std::vector<Cell> cells(nk * n);
  std::vector<double> h_opt(nk);
  for (std::size_t k = 0; k < nk; ++k) h_opt[k] = analytic_h_opt(config.model, config.kernels[k]);

  parallel_for_each_index(n, [&](std::size_t i) {
    std::optional<RatePath> path;
    const ArrivalData data = replicate(config, i, &path);
    const double mu_hat = mean_rate(data);
    for (std::size_t k = 0; k < nk; ++k) {
      const Kernel& kernel = config.kernels[k];
      Cell& c = cells[k * n + i];
      auto mise = [&](double h) {
        return empirical_mise(estimate_rate(data, kernel, h), *path, mu_hat);
      };
      const auto sel = select_bandwidth(data, kernel, config.rho, config.slope);
      if (sel.h_opt) {
        c.h_hat = *sel.h_opt;
        c.at_hat = mise(c.h_hat);
      }
      if (std::isfinite(h_opt[k])) {
        c.at_opt = mise(h_opt[k]);
        c.at_half = mise(0.5 * h_opt[k]);
        c.at_double = mise(2.0 * h_opt[k]);
      }
    }
  });

  for (std::size_t k = 0; k < nk; ++k) {
    KernelSummary s;
    s.kernel = config.kernels[k].name();
    s.h_opt = h_opt[k];
    std::vector<double> hh(n), mo(n), mh(n), m2(n), md(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Cell& c = cells[k * n + i];
      hh[i] = c.h_hat;
      mo[i] = c.at_opt;
      mh[i] = c.at_hat;
      m2[i] = c.at_half;
      md[i] = c.at_double;
      if (!std::isfinite(c.h_hat)) ++s.static_count;
    }
    s.h_hat = summarize(finite_only(hh));
    s.mise_h_opt = summarize(finite_only(mo));
    s.mise_h_hat = summarize(finite_only(mh));
    s.mise_half = summarize(finite_only(m2));
    s.mise_double = summarize(finite_only(md));
    s.h_hat_samples = std::move(hh);
    report.kernels.push_back(std::move(s));
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

nlohmann::json stat_json(const SampleStat& s) {
  if (s.count == 0) return nullptr;
  return {{"mean", s.mean}, {"sd", s.count > 1 ? nlohmann::json(s.sd) : nlohmann::json(nullptr)}, {"n", s.count}};
}

nlohmann::json num_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

void ExperimentConfig::validate() const {
  coxkern::validate(model);
  if (kernels.empty()) fail(ErrorCode::invalid_argument, "experiment needs at least one kernel");
  if (replications < 1) fail(ErrorCode::invalid_argument, "replication count must be at least 1");
  if (!(scale > 0.0 && scale <= 1.0)) fail(ErrorCode::invalid_argument, "scale must be in (0, 1]");
  if (!(horizon > 0.0)) fail(ErrorCode::invalid_argument, "horizon must be positive");
  if (!(rho > 0.0)) fail(ErrorCode::invalid_argument, "rho must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::invalid_argument, "alpha must be in (0, 1)");
}

std::size_t scaled_replications(std::size_t base_count, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) fail(ErrorCode::invalid_argument, "scale must be in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(base_count) * scale));
  return std::max<std::size_t>(n, 1);
}

ExperimentConfig table1_config(double scale) {
  ExperimentConfig c;
  c.model = TwoStateModel{};
  c.kernels = all_kernels();
  c.horizon = 500.0;
  c.scale = scale;
  c.replications = scaled_replications(kTableReplications, scale);
  return c;
}

ExperimentConfig table2_config(double scale) {
  ExperimentConfig c = table1_config(scale);
  c.model = LogGaussianModel{1000.0, 1.0, 6.0};
  c.horizon = 1500.0;
  return c;
}

ExperimentConfig coverage_config(CoverageModel which, double scale) {
  ExperimentConfig c;
  switch (which) {
    case CoverageModel::two_state:
      c.model = TwoStateModel{};
      c.horizon = 500.0;
      break;
    case CoverageModel::log_gaussian_short:
      c.model = LogGaussianModel{1000.0, 1.0, 6.0};
      c.horizon = 1500.0;
      break;
    case CoverageModel::log_gaussian_long:
      c.model = LogGaussianModel{1000.0, 20.0, 0.5};
      c.horizon = 1500.0;
      break;
  }
  c.kernels = {Kernel::epanechnikov()};
  c.lags = kTable3Lags;
  c.scale = scale;
  c.replications = scaled_replications(kCoverageReplications, scale);
  return c;
}

ExperimentConfig histogram_config(double scale) {
  ExperimentConfig c = table1_config(scale);
  c.kernels = {Kernel::epanechnikov()};
  c.replications = scaled_replications(kCoverageReplications, scale);
  return c;
}

SampleStat summarize(const std::vector<double>& xs) {
  SampleStat s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t i) {
  return derive_seed(master, seed_stream::replication, i);
}

ExperimentReport run_table1(const ExperimentConfig& config) {
  if (!std::holds_alternative<TwoStateModel>(config.model)) {
    fail(ErrorCode::invalid_argument, "table 1 runs on the two-state model");
  }
  return run_bandwidth_table(config, "table1");
}

ExperimentReport run_table2(const ExperimentConfig& config) {
  if (!std::holds_alternative<LogGaussianModel>(config.model)) {
    fail(ErrorCode::invalid_argument, "table 2 runs on a log-Gaussian model");
  }
  return run_bandwidth_table(config, "table2");
}

ExperimentReport run_coverage(const ExperimentConfig& config) {
  config.validate();
  if (config.lags.empty()) fail(ErrorCode::invalid_argument, "coverage needs at least one lag");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report = blank_report(config, "coverage");
  const Kernel& kernel = config.kernels.front();
  const std::size_t n = config.replications;
  const std::size_t nl = config.lags.size();
  std::vector<double> estimate(n * nl), variance(n * nl), lag_used(n * nl);
  std::vector<unsigned char> covered(n * nl);

  AcfOptions options;
  options.rho = config.rho;
  options.slope = config.slope;
  parallel_for_each_index(n, [&](std::size_t i) {
    const ArrivalData data = replicate(config, i, nullptr);
    const AcfEstimate acf = estimate_acf_curve(data, kernel, config.lags, options);
    const CiBand band = confidence_band(acf, config.alpha, config.r_max);
    for (std::size_t l = 0; l < nl; ++l) {
      const double truth = true_acf(config.model, acf.lags[l]);
      estimate[i * nl + l] = acf.corrected[l];
      variance[i * nl + l] = band.variance[l];
      lag_used[i * nl + l] = acf.lags[l];
      covered[i * nl + l] = band.lower[l] <= truth && truth <= band.upper[l];
    }
  });

  for (std::size_t l = 0; l < nl; ++l) {
    CoverageRow row;
    row.lag = config.lags[l];
    row.truth = true_acf(config.model, row.lag);
    std::vector<double> est(n);
    double hits = 0.0, vsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      est[i] = estimate[i * nl + l];
      hits += covered[i * nl + l];
      vsum += variance[i * nl + l];
    }
    row.count = n;
    row.coverage = hits / static_cast<double>(n);
    row.coverage_sd = std::sqrt(row.coverage * (1.0 - row.coverage) / static_cast<double>(n));
    row.estimate = summarize(est);
    row.mean_variance = vsum / static_cast<double>(n);
    report.coverage.push_back(row);
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

ExperimentReport run_hopt_histogram(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report = blank_report(config, "hopt_histogram");
  const Kernel& kernel = config.kernels.front();
  const std::size_t n = config.replications;
  std::vector<double> h_hat(n, kNaN);
  parallel_for_each_index(n, [&](std::size_t i) {
    const ArrivalData data = replicate(config, i, nullptr);
    const auto sel = select_bandwidth(data, kernel, config.rho, config.slope);
    if (sel.h_opt) h_hat[i] = *sel.h_opt;
  });
  KernelSummary s;
  s.kernel = kernel.name();
  s.h_opt = analytic_h_opt(config.model, kernel);
  for (double h : h_hat) {
    if (!std::isfinite(h)) ++s.static_count;
  }
  s.h_hat = summarize(finite_only(h_hat));
  s.h_hat_samples = std::move(h_hat);
  report.kernels.push_back(std::move(s));
  report.wall_seconds = seconds_since(t0);
  return report;
}

std::string report_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["experiment"] = r.name;
  j["model"] = r.model;
  j["horizon"] = r.horizon;
  j["replications"] = r.replications;
  j["seed"] = r.seed;
  j["scale"] = r.scale;
  j["wall_seconds"] = r.wall_seconds;
  j["skeleton_step"] = r.skeleton_step ? nlohmann::json(*r.skeleton_step) : nlohmann::json(nullptr);
  if (!r.kernels.empty()) {
    auto& ks = j["kernels"] = nlohmann::json::array();
    for (const auto& k : r.kernels) {
      ks.push_back({{"kernel", k.kernel},
                    {"h_opt", num_or_null(k.h_opt)},
                    {"h_hat", stat_json(k.h_hat)},
                    {"static_replications", k.static_count},
                    {"mise_h_opt", stat_json(k.mise_h_opt)},
                    {"mise_h_hat", stat_json(k.mise_h_hat)},
                    {"mise_half_h_opt", stat_json(k.mise_half)},
                    {"mise_double_h_opt", stat_json(k.mise_double)}});
    }
  }
  if (!r.coverage.empty()) {
    j["alpha"] = r.alpha;
    j["r_max"] = r.r_max > 0.0 ? nlohmann::json(r.r_max) : nlohmann::json(nullptr);
    auto& cs = j["coverage"] = nlohmann::json::array();
    for (const auto& c : r.coverage) {
      cs.push_back({{"lag", c.lag},
                    {"truth", c.truth},
                    {"coverage", c.coverage},
                    {"coverage_sd", c.coverage_sd},
                    {"n", c.count},
                    {"estimate", stat_json(c.estimate)},
                    {"mean_variance", c.mean_variance}});
    }
  }
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& r,
                                                const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  std::vector<std::filesystem::path> out;
  const auto csv = dir / (r.name + ".csv");
  if (r.name == "hopt_histogram") {
    const auto& k = r.kernels.front();
    std::vector<double> idx(k.h_hat_samples.size()), ref(k.h_hat_samples.size(), k.h_opt);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    io::write_csv(csv, {"replication", "h_hat", "h_opt"}, {idx, k.h_hat_samples, ref});
  } else if (!r.coverage.empty()) {
    const std::size_t n = r.coverage.size();
    std::vector<double> lag(n), truth(n), cov(n), sd(n), mean(n), mc_var(n), mean_v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = r.coverage[i];
      lag[i] = c.lag;
      truth[i] = c.truth;
      cov[i] = c.coverage;
      sd[i] = c.coverage_sd;
      mean[i] = c.estimate.mean;
      mc_var[i] = c.estimate.sd * c.estimate.sd;
      mean_v[i] = c.mean_variance;
    }
    io::write_csv(csv, {"t", "true_acf", "coverage", "coverage_sd", "mean_estimate", "mc_variance", "mean_variance"},
                  {lag, truth, cov, sd, mean, mc_var, mean_v});
  } else {
    const std::size_t n = r.kernels.size();
    std::vector<std::string> names(n);
    std::vector<std::vector<double>> cols(12, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = r.kernels[i];
      names[i] = k.kernel;
      const double vals[12] = {static_cast<double>(k.static_count), k.h_opt, k.h_hat.mean, k.h_hat.sd,
                               k.mise_h_opt.mean, k.mise_h_opt.sd, k.mise_h_hat.mean, k.mise_h_hat.sd,
                               k.mise_half.mean, k.mise_half.sd, k.mise_double.mean, k.mise_double.sd};
      for (std::size_t c = 0; c < 12; ++c) cols[c][i] = vals[c];
    }
    std::vector<std::span<const double>> spans(cols.begin(), cols.end());
    io::write_csv(csv,
                  {"kernel", "static_replications", "h_opt", "h_hat_mean", "h_hat_sd", "mise_h_opt_mean", "mise_h_opt_sd",
                   "mise_h_hat_mean", "mise_h_hat_sd", "mise_half_mean", "mise_half_sd",
                   "mise_double_mean", "mise_double_sd"},
                  names, spans);
  }
  out.push_back(csv);
  const auto js = dir / (r.name + ".json");
  io::write_text(js, report_json(r));
  out.push_back(js);
  return out;
}

}  // namespace coxkern
