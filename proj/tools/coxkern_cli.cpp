#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "coxkern/coxkern.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int exit_code(cox_status s) {
  switch (s) {
    case COX_OK: return kOk;
    case COX_INVALID_ARGUMENT:
    case COX_LAG_OUT_OF_RANGE: return kUsage;
    case COX_INVALID_DATA:
    case COX_EMPTY_DATA:
    case COX_IO_FAILURE: return kData;
    default: return kNumerical;
  }
}

struct Failure {
  cox_status status;
};

void check(cox_status s) {
  if (s != COX_OK) throw Failure{s};
}

void print_warning(const char* message, void*) { std::fprintf(stderr, "warning: %s\n", message); }

struct Globals {
  std::string kernel = "epanechnikov";
  double rho = 5.0;
  double alpha = 0.05;
  std::uint64_t seed = 20100601;
  std::string out = ".";
  bool kernel_given = false;
};

struct InputOptions {
  std::string path;
  std::string format = "text";
  double horizon = 0.0;
};

cox_format parse_format(const std::string& s) {
  return s == "binary" || s == "binary-f64" || s == "f64" ? COX_FORMAT_BINARY_F64 : COX_FORMAT_TEXT;
}

bool write_rate_path(const cox_rate_path* path, double horizon, const std::string& file) {
  std::ofstream out(file);
  if (!out) return false;
  const std::size_t n = cox_rate_path_segments(path);
  const double* starts = cox_rate_path_breakpoints(path);
  const double* values = cox_rate_path_values(path);
  char line[96];
  out << "t_start,t_end,rate\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double end = i + 1 < n ? starts[i + 1] : horizon;
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", starts[i], end, values[i]);
    out << line;
  }
  return static_cast<bool>(out);
}

bool write_simulation_metadata(const cox_model& model, const std::string& name, double horizon,
                               std::uint64_t seed, std::size_t events, double mu_hat,
                               const std::string& arrivals, const std::string& path_csv,
                               const std::string& file) {
  nlohmann::ordered_json meta;
  meta["model"] = name;
  nlohmann::ordered_json params;
  switch (model.kind) {
    case COX_MODEL_TWO_STATE:
      params = {{"k1", model.k1}, {"k2", model.k2}, {"rate_a", model.rate_a}, {"rate_b", model.rate_b}};
      break;
    case COX_MODEL_LOG_GAUSSIAN:
      params = {{"M", model.scale}, {"a", model.inv_time}, {"H", model.decay}};
      if (model.skeleton_step > 0.0) params["eps"] = model.skeleton_step;
      else params["eps"] = "default";
      break;
    default:
      params = {{"rate", model.rate}};
  }
  meta["parameters"] = params;
  meta["seed"] = seed;
  meta["horizon"] = horizon;
  meta["events"] = events;
  meta["mu_hat"] = mu_hat;
  double true_mean = 0.0;
  if (cox_model_true_mean(&model, &true_mean) == COX_OK) meta["true_mean"] = true_mean;
  meta["arrivals"] = arrivals;
  if (!path_csv.empty()) meta["rate_path"] = std::filesystem::path(path_csv).filename().string();
  std::ofstream out(file);
  out << meta.dump(2) << "\n";
  return static_cast<bool>(out);
}

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("input", in.path, "Arrival-time file")->required();
  cmd->add_option("--format", in.format, "Input format")
      ->check(CLI::IsMember({"text", "binary", "binary-f64", "f64"}));
  cmd->add_option("--T", in.horizon, "Observation length (default: largest timestamp)")
      ->check(CLI::PositiveNumber);
}

void print_summary(const cox_analysis_summary& s, const std::string& out) {
  std::printf("events        %zu\n", s.events);
  std::printf("T             %.10g\n", s.horizon);
  std::printf("mu_hat        %.10g\n", s.mu_hat);
  std::printf("h_pilot       %.10g\n", s.h_pilot);
  if (s.static_rate) {
    std::printf("h_opt         none (static rate)\n");
  } else {
    std::printf("h_opt         %.10g\n", s.h_opt);
  }
  std::printf("rate h        %.10g\n", s.rate_bandwidth);
  if (s.lags) std::printf("lags          %zu\n", s.lags);
  std::printf("output        %s\n", out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel estimation of arrival rates and their autocovariance for Cox processes"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--kernel", g.kernel, "uniform | epanechnikov | triangular | quartic | table:<file>")
      ->each([&](const std::string&) { g.kernel_given = true; });
  app.add_option("--rho", g.rho, "Expected events per pilot bandwidth")->check(CLI::PositiveNumber);
  app.add_option("--alpha", g.alpha, "Interval level complement")->check(CLI::Range(1e-12, 1.0 - 1e-12));
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate arrivals from a rate model");
  std::string model_name = "two-state";
  double sim_T = 500.0;
  std::string sim_format = "text";
  std::string sim_file;
  cox_model model;
  cox_model_defaults(COX_MODEL_TWO_STATE, &model);
  sim->add_option("--model", model_name)->check(CLI::IsMember({"two-state", "log-gaussian", "constant"}));
  sim->add_option("--T", sim_T, "Observation length")->check(CLI::PositiveNumber);
  sim->add_option("--k1", model.k1);
  sim->add_option("--k2", model.k2);
  sim->add_option("--rate-a", model.rate_a);
  sim->add_option("--rate-b", model.rate_b);
  sim->add_option("--M", model.scale);
  sim->add_option("--a", model.inv_time);
  sim->add_option("--H", model.decay);
  sim->add_option("--eps", model.skeleton_step, "Log-Gaussian skeleton step (default from H and a)");
  sim->add_option("--rate", model.rate, "Constant rate");
  sim->add_option("--format", sim_format)->check(CLI::IsMember({"text", "binary", "binary-f64", "f64"}));
  sim->add_option("--file", sim_file, "Output file name (default arrivals.txt / arrivals.f64)");
  bool sim_path = false;
  sim->add_flag("--path", sim_path, "Also write the simulated rate path to rate_path.csv");

  // rate / acf / ci / pipeline share input handling
  InputOptions in;
  double h = 0.0;
  bool auto_h = false;
  double grid_step = 0.0;
  std::string lags;
  double r_max = 0.0;

  auto* rate = app.add_subcommand("rate", "Kernel rate estimate");
  add_input(rate, in);
  auto* h_opt = rate->add_option("--h", h, "Bandwidth")->check(CLI::PositiveNumber);
  rate->add_flag("--auto-h", auto_h, "Select the bandwidth from the data (default)")->excludes(h_opt);
  rate->add_option("--grid-step", grid_step)->check(CLI::PositiveNumber);

  auto* acf = app.add_subcommand("acf", "Bias-corrected autocovariance estimate");
  add_input(acf, in);
  acf->add_option("--lags", lags, "log:N or t1,t2,...");
  acf->add_option("--grid-step", grid_step)->check(CLI::PositiveNumber);

  auto* ci = app.add_subcommand("ci", "Autocovariance with pointwise confidence intervals");
  add_input(ci, in);
  ci->add_option("--lags", lags, "log:N or t1,t2,...");
  ci->add_option("--grid-step", grid_step)->check(CLI::PositiveNumber);
  ci->add_option("--r-max", r_max, "Truncate the variance integral at this separation")
      ->check(CLI::PositiveNumber);

  auto* pipe = app.add_subcommand("pipeline", "Rate, autocovariance and intervals in one pass");
  add_input(pipe, in);
  pipe->add_option("--lags", lags, "log:N or t1,t2,...");
  pipe->add_option("--grid-step", grid_step)->check(CLI::PositiveNumber);
  pipe->add_option("--r-max", r_max, "Truncate the variance integral at this separation")
      ->check(CLI::PositiveNumber);
  pipe->add_option("--h", h, "Bandwidth for the rate output")->check(CLI::PositiveNumber);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo study");
  int table = 0;
  bool hist = false;
  double scale = 0.2;
  bool full = false;
  std::size_t reps = 0;
  std::string coverage_model = "two-state";
  auto* table_opt = exp->add_option("--table", table, "1, 2 or 3")->check(CLI::IsMember({1, 2, 3}));
  exp->add_flag("--hist-hopt", hist, "Bandwidth histogram (two-state)")->excludes(table_opt);
  auto* scale_opt = exp->add_option("--scale", scale, "Fraction of the reference replication count")
                        ->check(CLI::Range(1e-9, 1.0));
  exp->add_flag("--full", full, "Full reference replication counts")->excludes(scale_opt);
  exp->add_option("--replications", reps, "Override the replication count")->check(CLI::PositiveNumber);
  exp->add_option("--coverage-model", coverage_model, "Coverage model")
      ->check(CLI::IsMember({"two-state", "log-gaussian-short", "log-gaussian-long"}));
  exp->add_option("--lags", lags, "Coverage lags t1,t2,...");
  exp->add_option("--r-max", r_max)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (exp->parsed() && table == 0 && !hist) {
    std::fprintf(stderr, "error: experiment needs --table or --hist-hopt\n");
    return kUsage;
  }

  try {
    std::filesystem::create_directories(g.out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: cannot create %s: %s\n", g.out.c_str(), e.what());
    return kData;
  }

  try {
    if (sim->parsed()) {
      const cox_model_kind kind = model_name == "two-state"      ? COX_MODEL_TWO_STATE
                                  : model_name == "log-gaussian" ? COX_MODEL_LOG_GAUSSIAN
                                                                 : COX_MODEL_CONSTANT;
      model.kind = kind;
      const cox_format fmt = parse_format(sim_format);
      if (sim_file.empty()) sim_file = fmt == COX_FORMAT_TEXT ? "arrivals.txt" : "arrivals.f64";
      const std::string path = (std::filesystem::path(g.out) / sim_file).string();
      cox_arrivals* data = nullptr;
      cox_rate_path* truth = nullptr;
      check(cox_simulate(&model, sim_T, g.seed, &data, &truth));
      cox_status s = cox_arrivals_write(data, path.c_str(), fmt);
      const std::size_t n = cox_arrivals_count(data);
      const double mu = cox_arrivals_mean_rate(data);
      cox_arrivals_free(data);
      std::string path_csv;
      if (s == COX_OK && sim_path) {
        path_csv = (std::filesystem::path(g.out) / "rate_path.csv").string();
        if (!write_rate_path(truth, sim_T, path_csv)) s = COX_IO_FAILURE;
      }
      cox_rate_path_free(truth);
      check(s);
      const std::string meta_path =
          (std::filesystem::path(g.out) / (std::filesystem::path(sim_file).stem().string() + ".json")).string();
      if (!write_simulation_metadata(model, model_name, sim_T, g.seed, n, mu, sim_file, path_csv, meta_path)) {
        std::fprintf(stderr, "error: cannot write %s\n", meta_path.c_str());
        return kData;
      }
      std::printf("events        %zu\nT             %.10g\nmu_hat        %.10g\noutput        %s\nmetadata      %s\n",
                  n, sim_T, mu, path.c_str(), meta_path.c_str());
      if (!path_csv.empty()) std::printf("rate path     %s\n", path_csv.c_str());
      return kOk;
    }

    if (exp->parsed()) {
      cox_experiment_kind kind = hist         ? COX_EXPERIMENT_HISTOGRAM
                                 : table == 1 ? COX_EXPERIMENT_TABLE1
                                 : table == 2 ? COX_EXPERIMENT_TABLE2
                                              : COX_EXPERIMENT_COVERAGE;
      cox_experiment_config cfg;
      cox_experiment_config_defaults(kind, &cfg);
      cfg.scale = full ? 1.0 : scale;
      cfg.replications = reps;
      cfg.seed = g.seed;
      cfg.rho = g.rho;
      cfg.alpha = g.alpha;
      cfg.r_max = r_max;
      cfg.kernel = g.kernel_given ? g.kernel.c_str() : nullptr;
      cfg.lags = lags.empty() ? nullptr : lags.c_str();
      cfg.coverage_model = coverage_model == "two-state"            ? COX_COVERAGE_TWO_STATE
                           : coverage_model == "log-gaussian-short" ? COX_COVERAGE_LOG_GAUSSIAN_SHORT
                                                                    : COX_COVERAGE_LOG_GAUSSIAN_LONG;
      cox_experiment_report* report = nullptr;
      check(cox_run_experiment(&cfg, &report));
      const cox_status s = cox_experiment_report_write(report, g.out.c_str());
      std::fputs(cox_experiment_report_json(report), stdout);
      cox_experiment_report_free(report);
      check(s);
      return kOk;
    }

    cox_analysis_config cfg;
    cox_analysis_config_defaults(&cfg);
    cfg.input = in.path.c_str();
    cfg.format = parse_format(in.format);
    cfg.horizon = in.horizon;
    cfg.kernel = g.kernel.c_str();
    cfg.rho = g.rho;
    cfg.alpha = g.alpha;
    cfg.lags = lags.empty() ? nullptr : lags.c_str();
    cfg.grid_step = grid_step;
    cfg.r_max = r_max;
    cfg.bandwidth = h;
    cfg.out_dir = g.out.c_str();
    cfg.on_warning = print_warning;
    cfg.write_rate = rate->parsed() || pipe->parsed();
    cfg.write_acf = !rate->parsed();
    cfg.write_ci = ci->parsed() || pipe->parsed();
    cox_analysis_summary summary;
    check(cox_run_analysis(&cfg, &summary));
    print_summary(summary, g.out);
    return kOk;
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s (%s)\n", cox_last_error(), cox_status_name(f.status));
    return exit_code(f.status);
  }
}
