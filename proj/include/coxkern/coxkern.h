#ifndef COXKERN_COXKERN_H
#define COXKERN_COXKERN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define COXKERN_API __declspec(dllexport)
#elif defined(__GNUC__)
#define COXKERN_API __attribute__((visibility("default")))
#else
#define COXKERN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure cox_last_error() holds a
 * message for the calling thread until its next failing call. Output
 * pointers are left untouched on failure. */
typedef enum cox_status {
  COX_OK = 0,
  COX_INVALID_ARGUMENT = 1,
  COX_INVALID_BANDWIDTH = 2,
  COX_BANDWIDTH_TOO_LARGE = 3,
  COX_INVALID_DATA = 4,
  COX_EMPTY_DATA = 5,
  COX_LAG_OUT_OF_RANGE = 6,
  COX_SIMULATION_FAILURE = 7,
  COX_IO_FAILURE = 8,
  COX_OUT_OF_MEMORY = 9,
  COX_INTERNAL_ERROR = 10
} cox_status;

COXKERN_API const char* cox_last_error(void);
COXKERN_API const char* cox_status_name(cox_status status);
COXKERN_API const char* cox_version(void);

typedef void (*cox_message_fn)(const char* message, void* user);

/* ---- kernels ---------------------------------------------------------- */

typedef struct cox_kernel cox_kernel;

/* "uniform", "epanechnikov", "triangular", "quartic", or "table:<path>". */
COXKERN_API cox_status cox_kernel_create(const char* spec, cox_kernel** out);
COXKERN_API cox_status cox_kernel_from_table(const double* u, const double* f, size_t n,
                                             cox_kernel** out);
COXKERN_API void cox_kernel_free(cox_kernel* kernel);
COXKERN_API const char* cox_kernel_name(const cox_kernel* kernel);
COXKERN_API double cox_kernel_support(const cox_kernel* kernel);
COXKERN_API double cox_kernel_density(const cox_kernel* kernel, double u);
COXKERN_API double cox_kernel_squared_integral(const cox_kernel* kernel);
COXKERN_API double cox_kernel_gamma(const cox_kernel* kernel);
COXKERN_API double cox_kernel_autoconvolution(const cox_kernel* kernel, double x);
COXKERN_API cox_status cox_kernel_abs_moment(const cox_kernel* kernel, double t, double h,
                                             double* out);

/* ---- arrival data ----------------------------------------------------- */

typedef enum cox_format { COX_FORMAT_TEXT = 0, COX_FORMAT_BINARY_F64 = 1 } cox_format;

typedef struct cox_arrivals cox_arrivals;

/* Times must be sorted and lie in [0, horizon]. */
COXKERN_API cox_status cox_arrivals_create(const double* times, size_t n, double horizon,
                                           cox_arrivals** out);
/* horizon <= 0 takes T from the largest timestamp. Warnings (sorting, T
 * mismatch) are kept on the handle. */
COXKERN_API cox_status cox_arrivals_read(const char* path, cox_format format, double horizon,
                                         cox_arrivals** out);
COXKERN_API cox_status cox_arrivals_write(const cox_arrivals* data, const char* path,
                                          cox_format format);
COXKERN_API void cox_arrivals_free(cox_arrivals* data);
COXKERN_API size_t cox_arrivals_count(const cox_arrivals* data);
COXKERN_API double cox_arrivals_horizon(const cox_arrivals* data);
COXKERN_API const double* cox_arrivals_times(const cox_arrivals* data);
COXKERN_API double cox_arrivals_mean_rate(const cox_arrivals* data);
COXKERN_API size_t cox_arrivals_warning_count(const cox_arrivals* data);
COXKERN_API const char* cox_arrivals_warning(const cox_arrivals* data, size_t i);

/* ---- models and simulation -------------------------------------------- */

typedef enum cox_model_kind {
  COX_MODEL_TWO_STATE = 0,
  COX_MODEL_LOG_GAUSSIAN = 1,
  COX_MODEL_CONSTANT = 2
} cox_model_kind;

typedef struct cox_model {
  cox_model_kind kind;
  /* two-state: switching rates and the two arrival rates */
  double k1, k2, rate_a, rate_b;
  /* log-Gaussian: M, a, H and skeleton step (<= 0 selects the default) */
  double scale, inv_time, decay, skeleton_step;
  /* constant */
  double rate;
} cox_model;

COXKERN_API void cox_model_defaults(cox_model_kind kind, cox_model* out);
COXKERN_API cox_status cox_model_true_mean(const cox_model* model, double* out);
COXKERN_API cox_status cox_model_true_acf(const cox_model* model, double t, double* out);
COXKERN_API cox_status cox_model_true_slope(const cox_model* model, double* out);

typedef struct cox_rate_path cox_rate_path;

COXKERN_API cox_status cox_simulate_path(const cox_model* model, double horizon, uint64_t seed,
                                         cox_rate_path** out);
COXKERN_API void cox_rate_path_free(cox_rate_path* path);
COXKERN_API size_t cox_rate_path_segments(const cox_rate_path* path);
COXKERN_API const double* cox_rate_path_breakpoints(const cox_rate_path* path);
COXKERN_API const double* cox_rate_path_values(const cox_rate_path* path);
COXKERN_API double cox_rate_path_value_at(const cox_rate_path* path, double t);

COXKERN_API cox_status cox_simulate_arrivals(const cox_rate_path* path, uint64_t seed,
                                             cox_arrivals** out);
/* Path and arrivals in one call; both seeds derive from `seed`. The path is
 * returned when path_out is non-null. */
COXKERN_API cox_status cox_simulate(const cox_model* model, double horizon, uint64_t seed,
                                    cox_arrivals** out, cox_rate_path** path_out);

/* ---- rate estimation and bandwidth ------------------------------------ */

typedef struct cox_rate_estimate cox_rate_estimate;

/* grid_step <= 0 selects h / 10. */
COXKERN_API cox_status cox_estimate_rate(const cox_arrivals* data, const cox_kernel* kernel,
                                         double h, double grid_step, cox_rate_estimate** out);
COXKERN_API void cox_rate_free(cox_rate_estimate* rate);
COXKERN_API size_t cox_rate_size(const cox_rate_estimate* rate);
COXKERN_API const double* cox_rate_values(const cox_rate_estimate* rate);
COXKERN_API double cox_rate_time_at(const cox_rate_estimate* rate, size_t j);
COXKERN_API double cox_rate_bandwidth(const cox_rate_estimate* rate);
COXKERN_API double cox_rate_step(const cox_rate_estimate* rate);

typedef struct cox_bandwidth_selection {
  double mu_hat;
  double rho;
  double h_pilot;
  double cprime0;
  double cprime0_se;
  double h_opt; /* NaN when static_rate is set */
  int static_rate;
} cox_bandwidth_selection;

COXKERN_API cox_status cox_pilot_bandwidth(const cox_arrivals* data, double rho, double* out);
COXKERN_API cox_status cox_select_bandwidth(const cox_arrivals* data, const cox_kernel* kernel,
                                            double rho, cox_bandwidth_selection* out);
COXKERN_API cox_status cox_optimal_bandwidth(double mu, double cprime0, const cox_kernel* kernel,
                                             double* out);
COXKERN_API cox_status cox_empirical_mise(const cox_rate_estimate* rate, const cox_rate_path* truth,
                                          double mu_hat, double* out);

/* ---- ACF, variance and confidence intervals --------------------------- */

COXKERN_API cox_status cox_bias_correct(double raw, double mu_hat, const cox_kernel* kernel,
                                        double h, double lag, double* out);
COXKERN_API cox_status cox_empirical_cov4(const cox_rate_estimate* rate, double mu_hat, double t,
                                          double r, double* out);
/* r_max <= 0 integrates over the full range. */
COXKERN_API cox_status cox_variance_estimate(const cox_rate_estimate* rate, double mu_hat,
                                             double t, double r_max, double* out);
COXKERN_API cox_status cox_normal_quantile(double p, double* out);
COXKERN_API cox_status cox_confidence_interval(double corrected, double variance, double alpha,
                                               double* lower, double* upper);

typedef struct cox_acf_result cox_acf_result;

/* lags == NULL selects n_lags log-spaced default lags (50 when n_lags is 0). */
COXKERN_API cox_status cox_estimate_acf(const cox_arrivals* data, const cox_kernel* kernel,
                                        const double* lags, size_t n_lags, double rho,
                                        cox_acf_result** out);
COXKERN_API void cox_acf_free(cox_acf_result* acf);
COXKERN_API size_t cox_acf_size(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_lags(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_raw(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_corrected(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_bandwidths(const cox_acf_result* acf);
COXKERN_API void cox_acf_selection(const cox_acf_result* acf, cox_bandwidth_selection* out);
/* Computes V_hat and the intervals; the arrays below are NULL until then. */
COXKERN_API cox_status cox_acf_confidence(cox_acf_result* acf, double alpha, double r_max);
COXKERN_API const double* cox_acf_variance(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_lower(const cox_acf_result* acf);
COXKERN_API const double* cox_acf_upper(const cox_acf_result* acf);

/* ---- file pipeline ---------------------------------------------------- */

typedef struct cox_analysis_config {
  const char* input;
  cox_format format;
  double horizon;     /* <= 0: largest timestamp */
  const char* kernel; /* NULL: epanechnikov */
  double rho;
  double alpha;
  const char* lags;   /* "log:N" or "t1,t2,..."; NULL: log:50 */
  double grid_step;   /* <= 0: h / 10 */
  double r_max;       /* <= 0: full range */
  double bandwidth;   /* rate output bandwidth; <= 0: selected */
  const char* out_dir;
  int write_rate;
  int write_acf;
  int write_ci;
  cox_message_fn on_warning;
  void* user;
} cox_analysis_config;

typedef struct cox_analysis_summary {
  size_t events;
  double horizon;
  double mu_hat;
  double h_pilot;
  double h_opt; /* NaN when static_rate is set */
  double rate_bandwidth;
  int static_rate;
  size_t lags;
} cox_analysis_summary;

COXKERN_API void cox_analysis_config_defaults(cox_analysis_config* out);
COXKERN_API cox_status cox_run_analysis(const cox_analysis_config* config,
                                        cox_analysis_summary* out);

/* ---- Monte Carlo experiments ------------------------------------------ */

typedef enum cox_experiment_kind {
  COX_EXPERIMENT_TABLE1 = 1,
  COX_EXPERIMENT_TABLE2 = 2,
  COX_EXPERIMENT_COVERAGE = 3,
  COX_EXPERIMENT_HISTOGRAM = 4
} cox_experiment_kind;

typedef enum cox_coverage_model {
  COX_COVERAGE_TWO_STATE = 0,
  COX_COVERAGE_LOG_GAUSSIAN_SHORT = 1,
  COX_COVERAGE_LOG_GAUSSIAN_LONG = 2
} cox_coverage_model;

typedef struct cox_experiment_config {
  cox_experiment_kind kind;
  cox_coverage_model coverage_model;
  double scale;          /* fraction of the reference replication count */
  size_t replications;   /* 0: derived from scale */
  uint64_t seed;
  double rho;
  double alpha;
  double r_max;
  const char* kernel;    /* NULL: experiment default */
  const char* lags;      /* coverage lags "t1,t2,..."; NULL: 0.01 .. 10 */
} cox_experiment_config;

typedef struct cox_experiment_report cox_experiment_report;

COXKERN_API void cox_experiment_config_defaults(cox_experiment_kind kind,
                                                cox_experiment_config* out);
COXKERN_API cox_status cox_run_experiment(const cox_experiment_config* config,
                                          cox_experiment_report** out);
COXKERN_API void cox_experiment_report_free(cox_experiment_report* report);
COXKERN_API const char* cox_experiment_report_json(const cox_experiment_report* report);
/* Writes <name>.csv and <name>.json into dir. */
COXKERN_API cox_status cox_experiment_report_write(const cox_experiment_report* report,
                                                   const char* dir);

#ifdef __cplusplus
}
#endif

#endif
