#ifndef M2MBENCH_H
#define M2MBENCH_H

/* Generated by cbindgen from m2mbench-ffi; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define M2MBENCH_OK 0

#define M2MBENCH_ERR_INVALID 1

#define M2MBENCH_ERR_CONFIG 2

#define M2MBENCH_ERR_DATA 3

#define M2MBENCH_ERR_METRIC_UNDEFINED 4

#define M2MBENCH_ERR_SELFCHECK 5

#define M2MBENCH_METRIC_Q_TR 0

#define M2MBENCH_METRIC_D_S 1

#define M2MBENCH_METRIC_D_C 2

#define M2MBENCH_METRIC_BIAS 3

#define M2MBENCH_METRIC_D 4

#define M2MBENCH_METRIC_D_C_MEAN 5

#define M2MBENCH_METRIC_Q_TR_MEAN 6

#define M2MBENCH_DIRECTION_A2B 0

#define M2MBENCH_DIRECTION_B2A 1

// Opaque dataset configuration (schema + partition).
typedef struct m2mbench_config m2mbench_config;

// Opaque evaluation result.
typedef struct m2mbench_report m2mbench_report;

// Opaque triplet collection.
typedef struct m2mbench_triplets m2mbench_triplets;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Most recent error message for this thread; empty string when no
// call has failed yet. The pointer stays valid until the next failing
// call on the same thread.
const char *m2mbench_last_error(void);

// Crate version as a static string.
const char *m2mbench_version(void);

// Loads a shipped configuration by dataset name
// (3dshapes, synaction, celeba_d).
//
// # Safety
// `name` must be a valid NUL-terminated string; `out` must be a valid
// pointer. The handle must be released with `m2mbench_config_free`.
int m2mbench_config_builtin(const char *name, struct m2mbench_config **out);

// Loads a configuration from schema and partition files.
//
// # Safety
// Both paths must be valid NUL-terminated strings; `out` must be a
// valid pointer. Release the handle with `m2mbench_config_free`.
int m2mbench_config_open(const char *schema_path,
                         const char *partition_path,
                         struct m2mbench_config **out);

// Writes the 64-hex-digit partition hash (plus NUL) into `buf`.
// `buf_len` must be at least 65.
//
// # Safety
// `config` must be a live handle from this library; `buf` must point
// to at least `buf_len` writable bytes.
int m2mbench_config_partition_hash(const struct m2mbench_config *config, char *buf, size_t buf_len);

// # Safety
// `config` must be null or a live handle; it is invalid afterwards.
void m2mbench_config_free(struct m2mbench_config *config);

// Loads a triplet JSONL file.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be a valid
// pointer. Release the handle with `m2mbench_triplets_free`.
int m2mbench_triplets_open(const char *path, struct m2mbench_triplets **out);

// Number of triplets in the collection; 0 for a null handle.
//
// # Safety
// `triplets` must be null or a live handle.
uint64_t m2mbench_triplets_len(const struct m2mbench_triplets *triplets);

// # Safety
// `triplets` must be null or a live handle; it is invalid afterwards.
void m2mbench_triplets_free(struct m2mbench_triplets *triplets);

// Generates triplets under a named oracle from two manifest files.
// `epsilon < 0` disables label noise; `exhaustive != 0` enumerates
// every cross-domain pair instead of sampling `pairs` per direction.
//
// # Safety
// `config` must be a live handle; the paths and `oracle` must be
// valid NUL-terminated strings; `out` must be a valid pointer.
int m2mbench_simulate(const struct m2mbench_config *config,
                      const char *manifest_a_path,
                      const char *manifest_b_path,
                      const char *oracle,
                      double epsilon,
                      uint64_t pairs,
                      uint64_t seed,
                      int exhaustive,
                      struct m2mbench_triplets **out);

// Scores a triplet collection. `ground_truth != 0` evaluates against
// the ground-truth vectors carried by the triplets.
//
// # Safety
// `config` and `triplets` must be live handles; `out` must be a valid
// pointer. Release the handle with `m2mbench_report_free`.
int m2mbench_evaluate(const struct m2mbench_config *config,
                      const struct m2mbench_triplets *triplets,
                      double bias_threshold,
                      int ground_truth,
                      struct m2mbench_report **out);

// Reads one metric value (percent) out of a report. `direction` is
// ignored for the aggregate metrics (`D`, mean content, mean
// translation quality, bias).
//
// # Safety
// `report` must be a live handle; `out` must be a valid pointer.
int m2mbench_report_value(const struct m2mbench_report *report,
                          int metric,
                          int direction,
                          double *out);

// 1 when the report's bias exceeds its threshold, 0 when not, -1 for
// a null handle.
//
// # Safety
// `report` must be null or a live handle.
int m2mbench_report_low_confidence(const struct m2mbench_report *report);

// Full report serialized as JSON. Returns NULL on failure; release
// the string with `m2mbench_string_free`.
//
// # Safety
// `report` must be null or a live handle.
char *m2mbench_report_json(const struct m2mbench_report *report);

// # Safety
// `report` must be null or a live handle; it is invalid afterwards.
void m2mbench_report_free(struct m2mbench_report *report);

// # Safety
// `s` must be null or a string returned by this library; it is
// invalid afterwards.
void m2mbench_string_free(char *s);

// Runs the built-in consistency suite. Returns 0 when every check
// passes, 5 otherwise (the first failure's message is retrievable via
// `m2mbench_last_error`).
int m2mbench_selfcheck(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* M2MBENCH_H */
