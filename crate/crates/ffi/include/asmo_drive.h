#ifndef ASMO_DRIVE_H
#define ASMO_DRIVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AsmoStatus {
  ASMO_STATUS_OK = 0,
  ASMO_STATUS_NULL_POINTER = 1,
  ASMO_STATUS_INVALID_ARGUMENT = 2,
  ASMO_STATUS_CONFIG = 3,
  ASMO_STATUS_RUNTIME = 4,
  ASMO_STATUS_IO = 5,
  ASMO_STATUS_BUFFER_TOO_SMALL = 6,
  ASMO_STATUS_PANIC = 7,
} AsmoStatus;

/**
 * Opaque run result.
 */
typedef struct AsmoRun AsmoRun;

/**
 * Opaque scenario configuration.
 */
typedef struct AsmoScenario AsmoScenario;

typedef struct AsmoMetrics {
  double speed_rms_error;
  double speed_max_error;
  /**
   * NaN when the speed error never settles into the band.
   */
  double convergence_time;
  double flux_rms_error;
  double flux_rms_magnitude;
  double rr_final_error;
  /**
   * 0 asymptotically stable, 1 marginal, 2 unstable, -1 not classified.
   */
  int32_t stability;
  bool verdict;
  bool aborted;
  /**
   * Time of the abort, NaN if the run completed.
   */
  double failure_time;
} AsmoMetrics;

typedef struct AsmoMotorParams {
  double r_s;
  double r_r;
  double l_s;
  double l_r;
  double l_m;
  uint32_t pole_pairs;
  double inertia;
  double friction;
} AsmoMotorParams;

typedef struct AsmoDerivedParams {
  double sigma;
  double tau_r;
  double k;
  double gamma;
} AsmoDerivedParams;

typedef struct AsmoDemoVerdict {
  uint8_t mode;
  bool pass;
  double terminal_norm;
  double steady_amplitude;
  double ultimate_bound;
  double rms_x1;
} AsmoDemoVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, static NUL-terminated string.
 */
const char *asmo_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *asmo_last_error_message(void);

/**
 * Parse a scenario from a JSON string.
 */
enum AsmoStatus asmo_scenario_from_json(const char *json, struct AsmoScenario **out);

/**
 * Load a scenario from a JSON file.
 */
enum AsmoStatus asmo_scenario_load(const char *path, struct AsmoScenario **out);

/**
 * Built-in reference scenario.
 */
enum AsmoStatus asmo_scenario_reference(struct AsmoScenario **out);

/**
 * Overwrite one numeric config value by dotted path, e.g. `observer.gains.k_R`.
 */
enum AsmoStatus asmo_scenario_set(struct AsmoScenario *scenario, const char *path, double value);

void asmo_scenario_free(struct AsmoScenario *scenario);

/**
 * Run a scenario. An aborted run still yields a handle carrying the
 * partial records; check `AsmoMetrics::aborted`.
 */
enum AsmoStatus asmo_run(const struct AsmoScenario *scenario, struct AsmoRun **out);

void asmo_run_free(struct AsmoRun *run);

enum AsmoStatus asmo_run_metrics(const struct AsmoRun *run, struct AsmoMetrics *out);

enum AsmoStatus asmo_run_record_count(const struct AsmoRun *run, size_t *out);

/**
 * Number of record columns.
 */
size_t asmo_column_count(void);

/**
 * Index of a `run.csv` column by name, or -1.
 */
int32_t asmo_column_index(const char *name);

/**
 * Copy column `column` (`run.csv` order) into `buf`, which must hold at
 * least the record count.
 */
enum AsmoStatus asmo_run_column(const struct AsmoRun *run, size_t column, double *buf, size_t len);

/**
 * Write `run.csv` and `metrics.json` into `dir`, creating it if needed.
 */
enum AsmoStatus asmo_run_write(const struct AsmoRun *run, const char *dir);

enum AsmoStatus asmo_clarke(double a, double b, double c, double *alpha, double *beta);

enum AsmoStatus asmo_inverse_clarke(double alpha, double beta, double *abc);

enum AsmoStatus asmo_park(double alpha, double beta, double theta, double *d, double *q);

enum AsmoStatus asmo_inverse_park(double d, double q, double theta, double *alpha, double *beta);

/**
 * Default machine parameters.
 */
struct AsmoMotorParams asmo_motor_params_default(void);

enum AsmoStatus asmo_derived_params(const struct AsmoMotorParams *params,
                                    struct AsmoDerivedParams *out);

/**
 * Benchmark plant demo with default settings; `mode` is 1, 2 or 3.
 */
enum AsmoStatus asmo_testplant(uint8_t mode, struct AsmoDemoVerdict *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASMO_DRIVE_H */
