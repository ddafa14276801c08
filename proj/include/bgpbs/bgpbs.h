/*
 * C interface to the bgpbs toolkit: opaque handles and integer status codes.
 *
 * Every function returning int returns a bgpbs_status. On failure the
 * message is available from bgpbs_last_error() until the next failing call
 * on the same thread. Handles are freed with the matching *_free function;
 * passing NULL to a *_free function is a no-op.
 */
#ifndef BGPBS_BGPBS_H
#define BGPBS_BGPBS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BGPBS_BUILDING)
#    define BGPBS_API __declspec(dllexport)
#  else
#    define BGPBS_API __declspec(dllimport)
#  endif
#else
#  define BGPBS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum bgpbs_status {
  BGPBS_OK = 0,
  BGPBS_E_INVALID = 1,  /* invalid input, config, schema or arguments */
  BGPBS_E_IO = 2,
  BGPBS_E_DIVERGED = 3, /* autoencoder training produced a non-finite loss */
  BGPBS_E_INTERNAL = 4
} bgpbs_status;

typedef struct bgpbs_series bgpbs_series;
typedef struct bgpbs_model bgpbs_model;
typedef struct bgpbs_report bgpbs_report;

BGPBS_API const char* bgpbs_version(void);
BGPBS_API const char* bgpbs_last_error(void);
BGPBS_API const char* bgpbs_status_string(int status);

/* ---- feature series (CSV) ---- */

BGPBS_API int bgpbs_series_load(const char* path, bgpbs_series** out);
BGPBS_API int bgpbs_series_save(const bgpbs_series* series, const char* path);
BGPBS_API void bgpbs_series_free(bgpbs_series* series);
BGPBS_API size_t bgpbs_series_length(const bgpbs_series* series);
BGPBS_API size_t bgpbs_series_dimension(const bgpbs_series* series);
BGPBS_API size_t bgpbs_series_count_anomalous(const bgpbs_series* series);
/* NULL when col is out of range. Owned by the series. */
BGPBS_API const char* bgpbs_series_feature_name(const bgpbs_series* series, size_t col);
BGPBS_API int bgpbs_series_value(const bgpbs_series* series, size_t row, size_t col, double* out);
/* 0 benign, 1 anomalous */
BGPBS_API int bgpbs_series_label(const bgpbs_series* series, size_t row, int* out);

/*
 * Seed precedence for the calls below that accept `seed_override`:
 * a non-NULL override, then the BGPBS_SEED environment variable, then the
 * seed in the config file.
 */

/* Writes benign_train.csv, benign_test.csv and one CSV per scenario.
 * config_path may be NULL for the built-in defaults. */
BGPBS_API int bgpbs_generate_suite(const char* config_path, const uint64_t* seed_override,
                                   const char* out_dir);

/* ---- model: standardizer + autoencoder + threshold + heartbeat ---- */

typedef struct bgpbs_train_options {
  size_t window;
  size_t stride;
  size_t hidden;
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  uint64_t seed;
  double percentile;
  double heartbeat_k;
  size_t heartbeat_n;
  /* Comma-separated feature names summed into update volume; NULL selects
   * n_announcements,n_withdrawals. */
  const char* volume_features;
} bgpbs_train_options;

/* Fills defaults. The seed comes from BGPBS_SEED when set. */
BGPBS_API int bgpbs_train_options_init(bgpbs_train_options* options);

BGPBS_API int bgpbs_model_train(const bgpbs_series* train, const bgpbs_series* validation,
                                const bgpbs_train_options* options, bgpbs_model** out);
BGPBS_API int bgpbs_model_save(const bgpbs_model* model, const char* path);
BGPBS_API int bgpbs_model_load(const char* path, bgpbs_model** out);
BGPBS_API void bgpbs_model_free(bgpbs_model* model);
BGPBS_API double bgpbs_model_threshold(const bgpbs_model* model);
BGPBS_API size_t bgpbs_model_window(const bgpbs_model* model);
BGPBS_API size_t bgpbs_model_stride(const bgpbs_model* model);
/* Mean training loss of the first and last epoch. */
BGPBS_API int bgpbs_model_loss_curve(const bgpbs_model* model, double* first, double* last);

typedef struct bgpbs_score_summary {
  size_t windows;
  size_t anomalous_windows;
  size_t recon_flagged;
  size_t heartbeat_flagged;
  size_t verdict_type1;
  size_t verdict_type2;
} bgpbs_score_summary;

/* Scores one raw series. Writes a CSV with columns
 * start_bin,error,flagged,label,heartbeat,verdict when out_csv is non-NULL;
 * fills summary when non-NULL. */
BGPBS_API int bgpbs_model_score(const bgpbs_model* model, const bgpbs_series* series,
                                const char* out_csv, bgpbs_score_summary* summary);

/* ---- end-to-end evaluation ---- */

/* Runs the full protocol. Writes report.json, metrics.csv and
 * errors_<scenario>.csv into out_dir when it is non-NULL; returns the report
 * through `out` when it is non-NULL. config_path may be NULL for defaults. */
BGPBS_API int bgpbs_evaluate(const char* config_path, const uint64_t* seed_override,
                             const char* out_dir, bgpbs_report** out);
BGPBS_API void bgpbs_report_free(bgpbs_report* report);
BGPBS_API size_t bgpbs_report_scenario_count(const bgpbs_report* report);
BGPBS_API const char* bgpbs_report_scenario_name(const bgpbs_report* report, size_t index);
/* detector: "recon" | "heartbeat" | "hybrid"; metric: "recall" |
 * "false_positive_rate" | "tp" | "fp" | "tn" | "fn". Undefined rates are
 * reported as NaN. */
BGPBS_API int bgpbs_report_metric(const bgpbs_report* report, const char* scenario,
                                  const char* detector, const char* metric, double* out);
BGPBS_API double bgpbs_report_threshold(const bgpbs_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BGPBS_BGPBS_H */
