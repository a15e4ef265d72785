#ifndef NIRGAS_H
#define NIRGAS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all fallible functions.
 */
typedef enum NirgasStatus {
  NIRGAS_STATUS_OK = 0,
  NIRGAS_STATUS_NULL_POINTER = 1,
  NIRGAS_STATUS_INVALID_UTF8 = 2,
  NIRGAS_STATUS_PARSE_ERROR = 3,
  NIRGAS_STATUS_INVALID_CONFIG = 4,
  NIRGAS_STATUS_NUMERICAL_FAILURE = 5,
  NIRGAS_STATUS_IO = 6,
  NIRGAS_STATUS_OUT_OF_RANGE = 7,
  NIRGAS_STATUS_PANIC = 8,
} NirgasStatus;

/**
 * Branch of the index root. `None` marks a failed point.
 */
typedef enum NirgasBranch {
  NIRGAS_BRANCH_NONE = 0,
  NIRGAS_BRANCH_PRINCIPAL = 1,
  NIRGAS_BRANCH_NEGATED = 2,
} NirgasBranch;

typedef enum NirgasPolarization {
  NIRGAS_POLARIZATION_SIGMA_PLUS = 0,
  NIRGAS_POLARIZATION_SIGMA_MINUS = 1,
} NirgasPolarization;

/**
 * Opaque run configuration.
 */
typedef struct NirgasConfig NirgasConfig;

/**
 * Opaque sweep result.
 */
typedef struct NirgasResult NirgasResult;

typedef struct NirgasComplex {
  double re;
  double im;
} NirgasComplex;

/**
 * One sweep row. Optional quantities are NaN when `has_values` is false.
 */
typedef struct NirgasRow {
  double delta21;
  double pump;
  struct NirgasComplex eps;
  struct NirgasComplex mu;
  struct NirgasComplex xi_eh;
  struct NirgasComplex xi_he;
  struct NirgasComplex n;
  double fom;
  double r2_e;
  double r2_m;
  enum NirgasBranch branch;
  bool has_values;
  bool converged;
  bool nonlinear_regime;
  bool branch_point;
  bool suspicious_jump;
} NirgasRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *nirgas_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nirgas_version(void);

/**
 * Allocates the default configuration.
 */
struct NirgasConfig *nirgas_config_default(void);

/**
 * Parses and validates a JSON configuration. Empty text yields the defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum NirgasStatus nirgas_config_from_json(const char *json, struct NirgasConfig **out);

/**
 * Serializes a configuration to pretty JSON. Release with [`nirgas_string_free`].
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum NirgasStatus nirgas_config_to_json(const struct NirgasConfig *cfg, char **out);

/**
 * # Safety
 * `cfg` must be null or a handle from this library not yet freed.
 */
void nirgas_config_free(struct NirgasConfig *cfg);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void nirgas_string_free(char *s);

/**
 * Runs the sweep described by `cfg`. `workers` = 0 uses all cores.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum NirgasStatus nirgas_run(const struct NirgasConfig *cfg,
                             size_t workers,
                             struct NirgasResult **out);

/**
 * # Safety
 * `res` must be null or a live handle.
 */
size_t nirgas_result_row_count(const struct NirgasResult *res);

/**
 * Rows that did not converge or carry a quality flag.
 *
 * # Safety
 * `res` must be null or a live handle.
 */
size_t nirgas_result_flagged_count(const struct NirgasResult *res);

/**
 * Copies row `index` into `out`.
 *
 * # Safety
 * `res` must be a live handle and `out` writable.
 */
enum NirgasStatus nirgas_result_row(const struct NirgasResult *res,
                                    size_t index,
                                    struct NirgasRow *out);

/**
 * # Safety
 * `res` must be a live handle and `path` a NUL-terminated string.
 */
enum NirgasStatus nirgas_result_export_csv(const struct NirgasResult *res, const char *path);

/**
 * # Safety
 * `res` must be a live handle and `path` a NUL-terminated string.
 */
enum NirgasStatus nirgas_result_export_json(const struct NirgasResult *res, const char *path);

/**
 * # Safety
 * `res` must be null or a handle not yet freed.
 */
void nirgas_result_free(struct NirgasResult *res);

/**
 * Refractive index from ε, μ and the two chiralities. `prev` may be null;
 * otherwise the root nearest to it is selected.
 *
 * # Safety
 * `out` must be writable; `prev` must be null or readable.
 */
enum NirgasStatus nirgas_refractive_index(struct NirgasComplex eps,
                                          struct NirgasComplex mu,
                                          struct NirgasComplex xi_eh,
                                          struct NirgasComplex xi_he,
                                          enum NirgasPolarization polarization,
                                          const struct NirgasComplex *prev,
                                          struct NirgasComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NIRGAS_H */
