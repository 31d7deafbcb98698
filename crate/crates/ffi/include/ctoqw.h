/* Copyright 2026 The ctoqw Authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef CTOQW_H
#define CTOQW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum CtoqwStatus {
  CTOQW_STATUS_OK = 0,
  /**
   * Bad input: shapes, values, file contents or parameters.
   */
  CTOQW_STATUS_INVALID_INPUT = 1,
  /**
   * The computation ran but its result cannot be trusted.
   */
  CTOQW_STATUS_NUMERICAL = 2,
  /**
   * A required pointer argument was null.
   */
  CTOQW_STATUS_NULL_POINTER = 3,
  /**
   * An output buffer is shorter than required.
   */
  CTOQW_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * Internal error; the library caught a panic.
   */
  CTOQW_STATUS_INTERNAL = 5,
} CtoqwStatus;

typedef enum CtoqwVerdict {
  CTOQW_VERDICT_RECURRENT = 0,
  CTOQW_VERDICT_TRANSIENT = 1,
  CTOQW_VERDICT_PARTIALLY_RECURRENT = 2,
  CTOQW_VERDICT_UNDETERMINED = 3,
} CtoqwVerdict;

/**
 * Opaque coin handle.
 */
typedef struct CtoqwCoin CtoqwCoin;

/**
 * Classification summary. `rule` holds a NUL-terminated tag such as
 * `"corR-1"`. For partially recurrent two-level coins
 * `transient_state` holds the 2x2 transient density (8 doubles).
 */
typedef struct CtoqwClassification {
  enum CtoqwVerdict verdict;
  char rule[24];
  int has_drift;
  double drift;
  int h1;
  size_t kernel_dim;
  int has_transient_state;
  double transient_state[8];
} CtoqwClassification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The
 * pointer stays valid until the next call into the library on the same
 * thread.
 */
const char *ctoqw_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ctoqw_version(void);

/**
 * Parses a coin file (`{"d", "C", "A", "H"}` JSON) into a new handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CtoqwStatus ctoqw_coin_from_json(const char *json, struct CtoqwCoin **out);

/**
 * Builds a coin from three `2·d²` interleaved buffers.
 *
 * # Safety
 * `c`, `a` and `h` must each point to `2·d²` doubles; `out` must be valid.
 */
enum CtoqwStatus ctoqw_coin_from_arrays(size_t d,
                                        const double *c,
                                        const double *a,
                                        const double *h,
                                        struct CtoqwCoin **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `coin` must come from this library and not be used afterwards.
 */
void ctoqw_coin_free(struct CtoqwCoin *coin);

/**
 * Internal dimension `d`, or 0 for a null handle.
 *
 * # Safety
 * `coin` must be null or a live handle.
 */
size_t ctoqw_coin_dim(const struct CtoqwCoin *coin);

/**
 * Writes the unique stationary state (`2·d²` doubles). Fails with
 * `Numerical` when the stationary state is not unique.
 *
 * # Safety
 * `coin` must be live; `out` must hold `len` doubles.
 */
enum CtoqwStatus ctoqw_stationary_state(const struct CtoqwCoin *coin, double *out, size_t len);

/**
 * Asymptotic drift `m`.
 *
 * # Safety
 * `coin` must be live; `m` must be valid.
 */
enum CtoqwStatus ctoqw_drift(const struct CtoqwCoin *coin, double *m);

/**
 * Writes the trace-free drift operator `J` (`2·d²` doubles).
 *
 * # Safety
 * `coin` must be live; `out` must hold `len` doubles.
 */
enum CtoqwStatus ctoqw_drift_operator(const struct CtoqwCoin *coin, double *out, size_t len);

/**
 * Recurrence classification.
 *
 * # Safety
 * `coin` must be live; `out` must be valid.
 */
enum CtoqwStatus ctoqw_classify(const struct CtoqwCoin *coin, struct CtoqwClassification *out);

/**
 * `p_{i0 → j}(t)` on the truncated lattice. `rho0` may be null for `I/d`;
 * `radius == 0` picks a truncation that keeps leakage below tolerance.
 *
 * # Safety
 * `coin` must be live; `rho0` null or `2·d²` doubles; `p` valid.
 */
enum CtoqwStatus ctoqw_transition_probability(const struct CtoqwCoin *coin,
                                              const double *rho0,
                                              int64_t i0,
                                              int64_t j,
                                              double t,
                                              size_t radius,
                                              double *p);

/**
 * Monte Carlo estimate of the drift over `n_paths` paths to `horizon`.
 *
 * # Safety
 * `coin` must be live; `rho0` null or `2·d²` doubles; outputs valid.
 */
enum CtoqwStatus ctoqw_estimate_drift(const struct CtoqwCoin *coin,
                                      const double *rho0,
                                      double horizon,
                                      size_t n_paths,
                                      uint64_t seed,
                                      double *mean,
                                      double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTOQW_H */
