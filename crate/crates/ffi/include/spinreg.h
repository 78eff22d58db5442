/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SPINREG_H
#define SPINREG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_UTF8 = 2,
  /**
   * JSON or CSV that does not parse.
   */
  SR_STATUS_PARSE = 3,
  /**
   * Parsed input that violates a constraint.
   */
  SR_STATUS_INVALID = 4,
  /**
   * A fit or spectrum could not produce a result.
   */
  SR_STATUS_NUMERIC = 5,
  SR_STATUS_IO = 6,
  SR_STATUS_PANIC = 7,
} SrStatus;

typedef enum SrChainModel {
  SR_CHAIN_MODEL_HHCP = 0,
  SR_CHAIN_MODEL_SEDOR = 1,
} SrChainModel;

/**
 * A validated spin network.
 */
typedef struct SrNetwork SrNetwork;

/**
 * A measured or simulated trace.
 */
typedef struct SrTrace SrTrace;

/**
 * Per-layer chain cost, times in seconds. Pass `INFINITY` for a channel
 * that does not decay.
 */
typedef struct SrChainBudget {
  double t_gate;
  double t1_rho;
  double t1;
  double t2;
  double eta;
  double threshold;
} SrChainBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *sr_last_error(void);

/**
 * Parses and validates a network file's JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SrStatus sr_network_from_json(const char *json, struct SrNetwork **out);

/**
 * # Safety
 * `net` must come from [`sr_network_from_json`] or be null.
 */
void sr_network_free(struct SrNetwork *net);

/**
 * # Safety
 * `net` must be a live handle or null.
 */
size_t sr_network_spin_count(const struct SrNetwork *net);

/**
 * Runs one experiment spec (JSON) against `net`.
 *
 * # Safety
 * `net` must be live, `spec_json` NUL-terminated, `out` writable.
 */
enum SrStatus sr_run_experiment(const struct SrNetwork *net,
                                const char *spec_json,
                                uint64_t seed,
                                double noise_sigma,
                                struct SrTrace **out);

/**
 * Copies `n` points into a new trace. `parameter` is one of `echo_time`,
 * `frequency`, `lock_duration`, `pulse_length`, `phase`, `laser_time`.
 *
 * # Safety
 * `x` and `y` must point to `n` doubles each; `out` must be writable.
 */
enum SrStatus sr_trace_new(const char *parameter,
                           const double *x,
                           const double *y,
                           size_t n,
                           struct SrTrace **out);

/**
 * # Safety
 * `tr` must come from this library or be null.
 */
void sr_trace_free(struct SrTrace *tr);

/**
 * # Safety
 * `tr` must be a live handle or null.
 */
size_t sr_trace_len(const struct SrTrace *tr);

/**
 * Borrowed view of the sweep values, `sr_trace_len` long. Valid while
 * `tr` lives.
 *
 * # Safety
 * `tr` must be a live handle or null.
 */
const double *sr_trace_abscissa(const struct SrTrace *tr);

/**
 * # Safety
 * `tr` must be a live handle or null.
 */
const double *sr_trace_ordinate(const struct SrTrace *tr);

/**
 * Fits `model` (`lorentzian`, `decaying_cosine`, `exp_decay`, `cosine`,
 * `fft_peak_lorentzian`) and returns the result as a JSON string, to be
 * released with [`sr_string_free`].
 *
 * # Safety
 * `tr` must be live, `model` NUL-terminated, `json_out` writable.
 */
enum SrStatus sr_fit(const struct SrTrace *tr, const char *model, char **json_out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void sr_string_free(char *s);

double sr_sedor_ramsey_model(double d_hz, double t);

/**
 * Detuning and Rabi frequency in rad/s.
 */
double sr_sedor_esr_model(double d_hz, double t, double delta_omega, double omega0);

double sr_hyperfine_splitting(double a_perp, double a_par, double theta);

bool sr_defects_distinct(double candidate, double a_perp, double a_par, double uncertainty);

/**
 * Metres.
 */
double sr_coherence_radius(double t2);

/**
 * # Safety
 * `b` must be readable.
 */
double sr_chain_coherence(const struct SrChainBudget *b, size_t n, enum SrChainModel m);

/**
 * # Safety
 * `b` must be readable, `out` writable.
 */
enum SrStatus sr_max_layer(const struct SrChainBudget *b, enum SrChainModel m, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINREG_H */
