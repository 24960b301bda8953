#ifndef QUADMOD_H
#define QUADMOD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum qm_status {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A lattice carve or torus grid cannot produce the requested point count.
   */
  QM_STATUS_COUNT_UNREACHABLE = 3,
  QM_STATUS_IO = 4,
  /**
   * Output buffer too small; the required length has been written back.
   */
  QM_STATUS_BUFFER_TOO_SMALL = 5,
  QM_STATUS_INTERNAL = 6,
} qm_status;

/**
 * Opaque constellation handle.
 */
typedef struct qm_constellation qm_constellation;

typedef struct qm_ser_estimate {
  uint64_t errors;
  uint64_t trials;
  double ser;
  double ci95_halfwidth;
  /**
   * Non-zero when the symbol budget ran out before the error target.
   */
  uint8_t underresolved;
} qm_ser_estimate;

typedef struct qm_papr {
  double combined_symbol;
  double single_symbol;
  double combined_shaped;
  double single_shaped;
} qm_papr;

typedef struct qm_loop_result {
  /**
   * Timing-estimate variance over the measurement window, in `T^2`.
   */
  double variance;
  double mean_offset;
  double detector_gain;
  uint8_t locked;
} qm_loop_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qm_version(void);

/**
 * Builds a constellation by name, e.g. `"88-LAM"`, `"64-4D-PSK"`, `"hex-cyl-64-PSK"`,
 * `"bi-orthogonal"` or `"dual-16-QAM"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum qm_status qm_constellation_by_name(const char *name, struct qm_constellation **out);

/**
 * Reads a constellation from an interchange file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum qm_status qm_constellation_load(const char *path, struct qm_constellation **out);

/**
 * Writes a constellation in the interchange format.
 *
 * # Safety
 * `c` must be a live handle and `path` a NUL-terminated string.
 */
enum qm_status qm_constellation_save(const struct qm_constellation *c, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `c` must be null or a handle not yet freed.
 */
void qm_constellation_free(struct qm_constellation *c);

/**
 * Number of points, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t qm_constellation_len(const struct qm_constellation *c);

/**
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum qm_status qm_constellation_bits(const struct qm_constellation *c, double *out);

/**
 * Minimum 4-D Euclidean distance.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum qm_status qm_constellation_min_distance(const struct qm_constellation *c, double *out);

/**
 * Copies the points as `xI xQ yI yQ` quadruples into `buf`, which holds `*len` doubles.
 * `*len` is set to the number of doubles required (`4 * points`).
 *
 * # Safety
 * `c` must be a live handle, `len` valid, and `buf` valid for `*len` doubles.
 */
enum qm_status qm_constellation_points(const struct qm_constellation *c, double *buf, size_t *len);

/**
 * Monte-Carlo symbol error rate at `esn0_db` until `min_errors` errors or `max_symbols`
 * symbols. Deterministic in `(seed, stream)`.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum qm_status qm_simulate_ser(const struct qm_constellation *c,
                               double esn0_db,
                               uint64_t max_symbols,
                               uint64_t min_errors,
                               uint64_t seed,
                               uint64_t stream,
                               struct qm_ser_estimate *out);

/**
 * Union bound on the symbol error rate.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum qm_status qm_union_bound(const struct qm_constellation *c, double esn0_db, double *out);

/**
 * Symbol-level and RRC-shaped PAPR over `n_symbols` random symbols.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum qm_status qm_measure_papr(const struct qm_constellation *c,
                               size_t n_symbols,
                               double rolloff,
                               size_t span,
                               size_t sps,
                               uint64_t seed,
                               struct qm_papr *out);

/**
 * Normalized timing MCRB `B_N T / (4 pi^2 xi) * N0/Es`, halved when `dual` is non-zero.
 */
double qm_mcrb_tau_normalized(double bn_t, double xi, double esn0_linear, uint8_t dual);

/**
 * One Gardner timing-loop run on 16-QAM with the default chain (roll-off 0.2, 4 samples
 * per symbol). `esn0_db` is per polarization; pass infinity for a noiseless run.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum qm_status qm_run_timing_loop(double bn_t,
                                  uint8_t dual,
                                  double esn0_db,
                                  size_t measure_symbols,
                                  uint64_t seed,
                                  struct qm_loop_result *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUADMOD_H */
