/* spikebench: spiking-network digit classifier, trainer, inference service
 * and orchestration benchmark tooling behind a plain C interface.
 *
 * Conventions:
 *   - Every fallible call returns sb_status; SB_OK is 0.
 *   - On failure, sb_last_error() describes what went wrong (thread-local).
 *   - Structured inputs and outputs travel as JSON strings. Strings returned
 *     through char** out-parameters are heap-allocated; release them with
 *     sb_string_free().
 *   - Handles (sb_model*) are opaque; release them with sb_model_free().
 */
#ifndef SPIKEBENCH_H
#define SPIKEBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SB_API __declspec(dllexport)
#else
#define SB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sb_status {
  SB_OK = 0,
  SB_ERR_INVALID_ARGUMENT = 1, /* bad parameter or contract violation */
  SB_ERR_IO = 2,               /* file missing or unreadable/unwritable */
  SB_ERR_FORMAT = 3,           /* file is not the expected format */
  SB_ERR_DATA = 4,             /* well-formed file with unusable contents */
  SB_ERR_CORRUPT = 5,          /* checksum mismatch */
  SB_ERR_VERSION = 6,          /* artifact produced by an unknown version */
  SB_ERR_STATE = 7,            /* operation needs state the object lacks */
  SB_ERR_SETUP = 8,            /* benchmark target or service failed to start */
  SB_ERR_RUNTIME = 9,          /* anything else that went wrong at runtime */
} sb_status;

typedef struct sb_model sb_model; /* opaque trained-model handle */

/* Library version string, e.g. "1.0.0". Static storage; do not free. */
SB_API const char* sb_version(void);

/* Message for the most recent failure on this thread. Static per-thread
 * storage; valid until the next failing call. Never NULL. */
SB_API const char* sb_last_error(void);

/* Frees any string returned through a char** out-parameter. NULL is fine. */
SB_API void sb_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Models                                                               */

SB_API sb_status sb_model_load(const char* path, sb_model** out_model);
SB_API sb_status sb_model_save(sb_model* model, const char* path);
SB_API void sb_model_free(sb_model* model);

/* JSON description: n_exc, input_size, labels_assigned, window_ms,
 * intensity, train_seed, trained_samples, version, resident_bytes. */
SB_API sb_status sb_model_info(sb_model* model, char** out_json);

/* ------------------------------------------------------------------ */
/* Training                                                             */

/* config_json keys (all optional unless noted):
 *   data_dir      (required) directory with IDX train files, plain or .gz
 *   n_exc         excitatory neurons, default 400
 *   samples       per-epoch sample cap, default 60000
 *   epochs        default 1
 *   seed          default 0
 *   intensity     encoding rate ceiling in Hz, default 64.0
 *   window_ms     presentation window, default 100.0
 *   dt_ms         simulation step, default 1.0
 *   label_samples samples replayed to vote neuron labels, default 10000
 *
 * progress, when non-NULL, receives one JSON object per line of progress
 * (every 1000 samples and once at the end); user_data is passed through. */
typedef void (*sb_progress_fn)(const char* json_line, void* user_data);
SB_API sb_status sb_train(const char* config_json, sb_progress_fn progress, void* user_data,
                          sb_model** out_model);

/* options_json keys: samples (0 = all), stratified (default true), seed,
 * threads (0 = auto), intensity, window_ms.
 * The report JSON carries overall_all_activity, overall_proportion,
 * per_digit accuracies for both decoders, and no_activity_count. */
SB_API sb_status sb_evaluate(sb_model* model, const char* data_dir, const char* options_json,
                             char** out_report_json);

/* ------------------------------------------------------------------ */
/* Single prediction                                                    */

typedef struct sb_prediction {
  int32_t prediction_all_activity;
  int32_t prediction_proportion;
  int64_t total_output_spikes;
  int32_t no_activity; /* 1 when the network stayed silent (prediction is a default) */
  double inference_ms;
} sb_prediction;

/* pixels: pixel_count values in [0, 255]; pixel_count must match the model
 * input size (784 for 28x28). seed < 0 selects a nondeterministic seed.
 * intensity <= 0 selects the model's training intensity. */
SB_API sb_status sb_predict(sb_model* model, const double* pixels, size_t pixel_count,
                            int64_t seed, double intensity, sb_prediction* out);

/* ------------------------------------------------------------------ */
/* Inference service                                                    */

/* config_json keys: model_path (required), host (default "0.0.0.0"), port
 * (default 8080), queue_depth (default 64), request_timeout_ms (default
 * 120000). Blocks until sb_serve_stop() is called (e.g. from a signal
 * handler). Serves POST /predict, GET /healthz, GET /version. */
SB_API sb_status sb_serve(const char* config_json);
SB_API void sb_serve_stop(void);

/* ------------------------------------------------------------------ */
/* Closed-loop benchmark                                                */

/* config_json keys: url (required), data_dir (required, test split source),
 * clients (default 1), requests_per_client (default 50), timeout_ms
 * (default 120000), seed (default 0), and optional output paths:
 *   out       report JSON file
 *   out_csv   report as flat CSV
 *   raw_out   per-request sample dump CSV
 * The full report JSON is also returned through out_report_json. */
SB_API sb_status sb_bench_run(const char* config_json, char** out_report_json);

/* ------------------------------------------------------------------ */
/* Orchestration simulator                                              */

/* scenario_json keys: replicas, clients, requests_per_client, policy
 * ("round_robin" | "least_connections" | "random"), service (spec string
 * like "lognormal:749:0.055" or "deterministic:749"), network_delay_ms,
 * start_jitter_ms, seed, and optional "out" path for the report JSON.
 * Alternatively pass {"scenario_file": "path"} to load a key = value file.
 * The report JSON (benchmark schema plus per_replica and
 * scaling_efficiency) is returned through out_report_json. */
SB_API sb_status sb_orchsim_run(const char* scenario_json, char** out_report_json);

/* ------------------------------------------------------------------ */
/* Synthetic data                                                       */

/* Writes a procedurally generated 28x28 digit corpus in IDX format into
 * out_dir: train and test splits with train_per_class and test_per_class
 * samples per digit. gzip != 0 writes .gz files. */
SB_API sb_status sb_synthdata_write(const char* out_dir, uint32_t train_per_class,
                                    uint32_t test_per_class, uint64_t seed, int gzip);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPIKEBENCH_H */
