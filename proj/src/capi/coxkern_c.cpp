#include "coxkern/coxkern.h"

#include <cmath>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "acf.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "rate.hpp"
#include "simulate.hpp"
#include "varci.hpp"

using namespace coxkern;

struct cox_kernel {
  Kernel kernel;
};

struct cox_arrivals {
  ArrivalData data;
  std::vector<std::string> warnings;
};

struct cox_rate_path {
  RatePath path;
};

struct cox_rate_estimate {
  RateEstimate rate;
};

struct cox_acf_result {
  AcfEstimate acf;
  std::optional<CiBand> band;
};

struct cox_experiment_report {
  ExperimentReport report;
  std::string json;
};

namespace {

thread_local std::string last_error;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

cox_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return COX_INVALID_ARGUMENT;
    case ErrorCode::invalid_bandwidth: return COX_INVALID_BANDWIDTH;
    case ErrorCode::bandwidth_too_large: return COX_BANDWIDTH_TOO_LARGE;
    case ErrorCode::invalid_data: return COX_INVALID_DATA;
    case ErrorCode::empty_data: return COX_EMPTY_DATA;
    case ErrorCode::lag_out_of_range: return COX_LAG_OUT_OF_RANGE;
    case ErrorCode::simulation_failure: return COX_SIMULATION_FAILURE;
    case ErrorCode::io_failure: return COX_IO_FAILURE;
  }
  return COX_INTERNAL_ERROR;
}

template <class F>
cox_status guarded(F&& body) {
  try {
    body();
    return COX_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return COX_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return COX_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return COX_INTERNAL_ERROR;
  }
}

template <class T>
void require(const T* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

io::Format to_format(cox_format f) {
  switch (f) {
    case COX_FORMAT_TEXT: return io::Format::text;
    case COX_FORMAT_BINARY_F64: return io::Format::binary;
  }
  fail(ErrorCode::invalid_argument, "unknown format");
}

RateModel to_model(const cox_model* m) {
  require(m, "model");
  RateModel model;
  switch (m->kind) {
    case COX_MODEL_TWO_STATE:
      model = TwoStateModel{m->k1, m->k2, m->rate_a, m->rate_b};
      break;
    case COX_MODEL_LOG_GAUSSIAN:
      model = LogGaussianModel{m->scale, m->inv_time, m->decay, m->skeleton_step};
      break;
    case COX_MODEL_CONSTANT:
      model = ConstantModel{m->rate};
      break;
    default:
      fail(ErrorCode::invalid_argument, "unknown model kind");
  }
  validate(model);
  return model;
}

void fill_selection(const BandwidthSelection& s, cox_bandwidth_selection* out) {
  out->mu_hat = s.mu_hat;
  out->rho = s.rho;
  out->h_pilot = s.h_pilot;
  out->cprime0 = s.slope.slope;
  out->cprime0_se = s.slope.standard_error;
  out->h_opt = s.h_opt.value_or(kNaN);
  out->static_rate = s.static_rate() ? 1 : 0;
}

}  // namespace

extern "C" {

const char* cox_last_error(void) { return last_error.c_str(); }

const char* cox_status_name(cox_status status) {
  switch (status) {
    case COX_OK: return "ok";
    case COX_INVALID_ARGUMENT: return "invalid argument";
    case COX_INVALID_BANDWIDTH: return "invalid bandwidth";
    case COX_BANDWIDTH_TOO_LARGE: return "bandwidth too large";
    case COX_INVALID_DATA: return "invalid data";
    case COX_EMPTY_DATA: return "empty data";
    case COX_LAG_OUT_OF_RANGE: return "lag out of range";
    case COX_SIMULATION_FAILURE: return "simulation failure";
    case COX_IO_FAILURE: return "i/o failure";
    case COX_OUT_OF_MEMORY: return "out of memory";
    case COX_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* cox_version(void) { return "1.0.0"; }

cox_status cox_kernel_create(const char* spec, cox_kernel** out) {
  return guarded([&] {
    require(spec, "kernel spec");
    require(out, "out");
    *out = new cox_kernel{resolve_kernel(spec)};
  });
}

cox_status cox_kernel_from_table(const double* u, const double* f, size_t n, cox_kernel** out) {
  return guarded([&] {
    require(u, "u");
    require(f, "f");
    require(out, "out");
    *out = new cox_kernel{Kernel::from_table({u, u + n}, {f, f + n})};
  });
}

void cox_kernel_free(cox_kernel* kernel) { delete kernel; }
const char* cox_kernel_name(const cox_kernel* k) { return k ? k->kernel.name().c_str() : ""; }
double cox_kernel_support(const cox_kernel* k) { return k ? k->kernel.support() : kNaN; }
double cox_kernel_density(const cox_kernel* k, double u) { return k ? k->kernel.density(u) : kNaN; }
double cox_kernel_squared_integral(const cox_kernel* k) { return k ? k->kernel.squared_integral() : kNaN; }
double cox_kernel_gamma(const cox_kernel* k) { return k ? k->kernel.gamma_f() : kNaN; }
double cox_kernel_autoconvolution(const cox_kernel* k, double x) {
  return k ? k->kernel.autoconvolution(x) : kNaN;
}

cox_status cox_kernel_abs_moment(const cox_kernel* k, double t, double h, double* out) {
  return guarded([&] {
    require(k, "kernel");
    require(out, "out");
    *out = k->kernel.abs_moment_integral(t, h);
  });
}

cox_status cox_arrivals_create(const double* times, size_t n, double horizon, cox_arrivals** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(times, "times");
    std::vector<double> v(times, times + n);
    *out = new cox_arrivals{ArrivalData(std::move(v), horizon), {}};
  });
}

cox_status cox_arrivals_read(const char* path, cox_format format, double horizon, cox_arrivals** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto in = io::read_arrivals(path, to_format(format),
                                horizon > 0.0 ? std::optional<double>(horizon) : std::nullopt);
    *out = new cox_arrivals{std::move(in.data), std::move(in.warnings)};
  });
}

cox_status cox_arrivals_write(const cox_arrivals* data, const char* path, cox_format format) {
  return guarded([&] {
    require(data, "data");
    require(path, "path");
    io::write_arrivals(path, data->data.times(), to_format(format));
  });
}

void cox_arrivals_free(cox_arrivals* data) { delete data; }
size_t cox_arrivals_count(const cox_arrivals* d) { return d ? d->data.size() : 0; }
double cox_arrivals_horizon(const cox_arrivals* d) { return d ? d->data.horizon() : kNaN; }
const double* cox_arrivals_times(const cox_arrivals* d) { return d ? d->data.times().data() : nullptr; }
double cox_arrivals_mean_rate(const cox_arrivals* d) { return d ? mean_rate(d->data) : kNaN; }
size_t cox_arrivals_warning_count(const cox_arrivals* d) { return d ? d->warnings.size() : 0; }
const char* cox_arrivals_warning(const cox_arrivals* d, size_t i) {
  return d && i < d->warnings.size() ? d->warnings[i].c_str() : nullptr;
}

void cox_model_defaults(cox_model_kind kind, cox_model* out) {
  if (!out) return;
  const TwoStateModel ts;
  const LogGaussianModel lg;
  const ConstantModel cm;
  *out = cox_model{kind, ts.k1, ts.k2, ts.rate_a, ts.rate_b, lg.scale, lg.inv_time, lg.decay, lg.step, cm.rate};
}

cox_status cox_model_true_mean(const cox_model* model, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = true_mean(to_model(model));
  });
}

cox_status cox_model_true_acf(const cox_model* model, double t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = true_acf(to_model(model), t);
  });
}

cox_status cox_model_true_slope(const cox_model* model, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = true_acf_slope_at_zero(to_model(model));
  });
}

cox_status cox_simulate_path(const cox_model* model, double horizon, uint64_t seed, cox_rate_path** out) {
  return guarded([&] {
    require(out, "out");
    *out = new cox_rate_path{simulate_path(to_model(model), horizon, seed)};
  });
}

void cox_rate_path_free(cox_rate_path* path) { delete path; }
size_t cox_rate_path_segments(const cox_rate_path* p) { return p ? p->path.segments() : 0; }
const double* cox_rate_path_breakpoints(const cox_rate_path* p) { return p ? p->path.breakpoints().data() : nullptr; }
const double* cox_rate_path_values(const cox_rate_path* p) { return p ? p->path.values().data() : nullptr; }
double cox_rate_path_value_at(const cox_rate_path* p, double t) { return p ? p->path.value_at(t) : kNaN; }

cox_status cox_simulate_arrivals(const cox_rate_path* path, uint64_t seed, cox_arrivals** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new cox_arrivals{simulate_arrivals(path->path, seed), {}};
  });
}

cox_status cox_simulate(const cox_model* model, double horizon, uint64_t seed, cox_arrivals** out,
                        cox_rate_path** path_out) {
  return guarded([&] {
    require(out, "out");
    RatePath path = simulate_path(to_model(model), horizon, derive_seed(seed, seed_stream::rate_path, 0));
    auto* arrivals = new cox_arrivals{simulate_arrivals(path, derive_seed(seed, seed_stream::arrivals, 0)), {}};
    if (path_out) {
      try {
        *path_out = new cox_rate_path{std::move(path)};
      } catch (...) {
        delete arrivals;
        throw;
      }
    }
    *out = arrivals;
  });
}

cox_status cox_estimate_rate(const cox_arrivals* data, const cox_kernel* kernel, double h,
                             double grid_step, cox_rate_estimate** out) {
  return guarded([&] {
    require(data, "data");
    require(kernel, "kernel");
    require(out, "out");
    *out = new cox_rate_estimate{estimate_rate(data->data, kernel->kernel, h, grid_step)};
  });
}

void cox_rate_free(cox_rate_estimate* rate) { delete rate; }
size_t cox_rate_size(const cox_rate_estimate* r) { return r ? r->rate.size() : 0; }
const double* cox_rate_values(const cox_rate_estimate* r) { return r ? r->rate.values.data() : nullptr; }
double cox_rate_time_at(const cox_rate_estimate* r, size_t j) { return r ? r->rate.time_at(j) : kNaN; }
double cox_rate_bandwidth(const cox_rate_estimate* r) { return r ? r->rate.bandwidth : kNaN; }
double cox_rate_step(const cox_rate_estimate* r) { return r ? r->rate.step : kNaN; }

cox_status cox_pilot_bandwidth(const cox_arrivals* data, double rho, double* out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    *out = pilot_bandwidth(data->data, rho);
  });
}

cox_status cox_select_bandwidth(const cox_arrivals* data, const cox_kernel* kernel, double rho,
                                cox_bandwidth_selection* out) {
  return guarded([&] {
    require(data, "data");
    require(kernel, "kernel");
    require(out, "out");
    fill_selection(select_bandwidth(data->data, kernel->kernel, rho), out);
  });
}

cox_status cox_optimal_bandwidth(double mu, double cprime0, const cox_kernel* kernel, double* out) {
  return guarded([&] {
    require(kernel, "kernel");
    require(out, "out");
    *out = optimal_bandwidth(mu, cprime0, kernel->kernel);
  });
}

cox_status cox_empirical_mise(const cox_rate_estimate* rate, const cox_rate_path* truth, double mu_hat,
                              double* out) {
  return guarded([&] {
    require(rate, "rate");
    require(truth, "truth");
    require(out, "out");
    *out = empirical_mise(rate->rate, truth->path, mu_hat);
  });
}

cox_status cox_bias_correct(double raw, double mu_hat, const cox_kernel* kernel, double h, double lag,
                            double* out) {
  return guarded([&] {
    require(kernel, "kernel");
    require(out, "out");
    *out = bias_correct(raw, mu_hat, kernel->kernel, h, lag);
  });
}

cox_status cox_empirical_cov4(const cox_rate_estimate* rate, double mu_hat, double t, double r,
                              double* out) {
  return guarded([&] {
    require(rate, "rate");
    require(out, "out");
    *out = empirical_cov4(rate->rate, mu_hat, t, r);
  });
}

cox_status cox_variance_estimate(const cox_rate_estimate* rate, double mu_hat, double t, double r_max,
                                 double* out) {
  return guarded([&] {
    require(rate, "rate");
    require(out, "out");
    *out = variance_estimate(rate->rate, mu_hat, t, r_max);
  });
}

cox_status cox_normal_quantile(double p, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = normal_quantile(p);
  });
}

cox_status cox_confidence_interval(double corrected, double variance, double alpha, double* lower,
                                   double* upper) {
  return guarded([&] {
    require(lower, "lower");
    require(upper, "upper");
    const auto ci = confidence_interval(corrected, variance, alpha);
    *lower = ci.lower;
    *upper = ci.upper;
  });
}

cox_status cox_estimate_acf(const cox_arrivals* data, const cox_kernel* kernel, const double* lags,
                            size_t n_lags, double rho, cox_acf_result** out) {
  return guarded([&] {
    require(data, "data");
    require(kernel, "kernel");
    require(out, "out");
    AcfOptions options;
    options.rho = rho;
    std::vector<double> requested;
    if (lags) {
      requested.assign(lags, lags + n_lags);
      if (requested.empty()) fail(ErrorCode::invalid_argument, "empty lag list");
    } else if (n_lags > 0) {
      options.default_lag_count = n_lags;
    }
    *out = new cox_acf_result{estimate_acf_curve(data->data, kernel->kernel, requested, options), std::nullopt};
  });
}

void cox_acf_free(cox_acf_result* acf) { delete acf; }
size_t cox_acf_size(const cox_acf_result* a) { return a ? a->acf.size() : 0; }
const double* cox_acf_lags(const cox_acf_result* a) { return a ? a->acf.lags.data() : nullptr; }
const double* cox_acf_raw(const cox_acf_result* a) { return a ? a->acf.raw.data() : nullptr; }
const double* cox_acf_corrected(const cox_acf_result* a) { return a ? a->acf.corrected.data() : nullptr; }
const double* cox_acf_bandwidths(const cox_acf_result* a) { return a ? a->acf.h_used.data() : nullptr; }

void cox_acf_selection(const cox_acf_result* a, cox_bandwidth_selection* out) {
  if (a && out) fill_selection(a->acf.selection, out);
}

cox_status cox_acf_confidence(cox_acf_result* a, double alpha, double r_max) {
  return guarded([&] {
    require(a, "acf");
    a->band = confidence_band(a->acf, alpha, r_max);
  });
}

const double* cox_acf_variance(const cox_acf_result* a) { return a && a->band ? a->band->variance.data() : nullptr; }
const double* cox_acf_lower(const cox_acf_result* a) { return a && a->band ? a->band->lower.data() : nullptr; }
const double* cox_acf_upper(const cox_acf_result* a) { return a && a->band ? a->band->upper.data() : nullptr; }

void cox_analysis_config_defaults(cox_analysis_config* out) {
  if (!out) return;
  *out = cox_analysis_config{};
  out->format = COX_FORMAT_TEXT;
  out->rho = 5.0;
  out->alpha = 0.05;
  out->out_dir = ".";
  out->write_rate = 1;
  out->write_acf = 1;
  out->write_ci = 1;
}

cox_status cox_run_analysis(const cox_analysis_config* c, cox_analysis_summary* out) {
  return guarded([&] {
    require(c, "config");
    require(c->input, "input");
    AnalysisConfig config;
    config.input = c->input;
    config.format = to_format(c->format);
    if (c->horizon > 0.0) config.horizon = c->horizon;
    if (c->kernel) config.kernel = c->kernel;
    config.rho = c->rho;
    config.alpha = c->alpha;
    if (c->lags) config.lags = LagSpec::parse(c->lags);
    config.grid_step = c->grid_step;
    config.r_max = c->r_max;
    if (c->bandwidth > 0.0) config.bandwidth = c->bandwidth;
    if (c->out_dir) config.out_dir = c->out_dir;
    const Stages stages{c->write_rate != 0, c->write_acf != 0, c->write_ci != 0};
    const AnalysisResult r = run_analysis(config, stages);
    if (c->on_warning) {
      for (const auto& w : r.warnings) c->on_warning(w.c_str(), c->user);
    }
    if (out) {
      out->events = r.events;
      out->horizon = r.horizon;
      out->mu_hat = r.mu_hat;
      out->h_pilot = r.selection.h_pilot;
      out->h_opt = r.selection.h_opt.value_or(kNaN);
      out->rate_bandwidth = r.rate_bandwidth;
      out->static_rate = r.selection.static_rate() ? 1 : 0;
      out->lags = r.acf ? r.acf->size() : 0;
    }
  });
}

void cox_experiment_config_defaults(cox_experiment_kind kind, cox_experiment_config* out) {
  if (!out) return;
  const ExperimentConfig base;
  *out = cox_experiment_config{};
  out->kind = kind;
  out->coverage_model = COX_COVERAGE_TWO_STATE;
  out->scale = base.scale;
  out->seed = base.seed;
  out->rho = base.rho;
  out->alpha = base.alpha;
}

cox_status cox_run_experiment(const cox_experiment_config* c, cox_experiment_report** out) {
  return guarded([&] {
    require(c, "config");
    require(out, "out");
    ExperimentConfig config;
    switch (c->kind) {
      case COX_EXPERIMENT_TABLE1: config = table1_config(c->scale); break;
      case COX_EXPERIMENT_TABLE2: config = table2_config(c->scale); break;
      case COX_EXPERIMENT_HISTOGRAM: config = histogram_config(c->scale); break;
      case COX_EXPERIMENT_COVERAGE:
        switch (c->coverage_model) {
          case COX_COVERAGE_TWO_STATE: config = coverage_config(CoverageModel::two_state, c->scale); break;
          case COX_COVERAGE_LOG_GAUSSIAN_SHORT:
            config = coverage_config(CoverageModel::log_gaussian_short, c->scale);
            break;
          case COX_COVERAGE_LOG_GAUSSIAN_LONG:
            config = coverage_config(CoverageModel::log_gaussian_long, c->scale);
            break;
          default: fail(ErrorCode::invalid_argument, "unknown coverage model");
        }
        break;
      default: fail(ErrorCode::invalid_argument, "unknown experiment kind");
    }
    if (c->replications > 0) config.replications = c->replications;
    config.seed = c->seed;
    config.rho = c->rho;
    config.alpha = c->alpha;
    config.r_max = c->r_max;
    if (c->kernel) config.kernels = {resolve_kernel(c->kernel)};
    if (c->lags) config.lags = LagSpec::parse(c->lags).lags;

    ExperimentReport report;
    switch (c->kind) {
      case COX_EXPERIMENT_TABLE1: report = run_table1(config); break;
      case COX_EXPERIMENT_TABLE2: report = run_table2(config); break;
      case COX_EXPERIMENT_COVERAGE: report = run_coverage(config); break;
      case COX_EXPERIMENT_HISTOGRAM: report = run_hopt_histogram(config); break;
    }
    auto* r = new cox_experiment_report{std::move(report), {}};
    r->json = report_json(r->report);
    *out = r;
  });
}

void cox_experiment_report_free(cox_experiment_report* report) { delete report; }

const char* cox_experiment_report_json(const cox_experiment_report* report) {
  return report ? report->json.c_str() : "";
}

cox_status cox_experiment_report_write(const cox_experiment_report* report, const char* dir) {
  return guarded([&] {
    require(report, "report");
    require(dir, "dir");
    write_report(report->report, dir);
  });
}

}  // extern "C"
