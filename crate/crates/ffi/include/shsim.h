#ifndef SHSIM_H
#define SHSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ShsimStatus {
  SHSIM_STATUS_OK = 0,
  SHSIM_STATUS_NULL_POINTER = 1,
  SHSIM_STATUS_INVALID_ARGUMENT = 2,
  SHSIM_STATUS_CONFIG = 3,
  SHSIM_STATUS_INTEGRATION = 4,
  SHSIM_STATUS_IO = 5,
  SHSIM_STATUS_BUFFER_TOO_SMALL = 6,
  SHSIM_STATUS_PANIC = 7,
} ShsimStatus;

/**
 * Opaque simulator handle.
 */
typedef struct ShsimSimulator ShsimSimulator;

/**
 * Opaque trajectory handle.
 */
typedef struct ShsimTrajectory ShsimTrajectory;

/**
 * Per-state diagnostics of a trajectory.
 */
typedef struct ShsimDiagnostics {
  double time;
  double sphere_defect;
  double v_norm_sq;
  double l2n_norm;
  double da_norm_sq;
} ShsimDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *shsim_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library on the same thread.
 */
const char *shsim_last_error_message(void);

/**
 * Build a simulator from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShsimStatus shsim_simulator_from_toml(const char *toml, struct ShsimSimulator **out);

/**
 * Build a simulator from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShsimStatus shsim_simulator_from_file(const char *path, struct ShsimSimulator **out);

/**
 * # Safety
 * `sim` must come from a `shsim_simulator_from_*` call.
 */
enum ShsimStatus shsim_simulator_set_seed(struct ShsimSimulator *sim, uint64_t seed);

/**
 * Number of spectral coefficients per state, 0 for NULL.
 *
 * # Safety
 * `sim` must be NULL or a live simulator handle.
 */
size_t shsim_simulator_dim(const struct ShsimSimulator *sim);

/**
 * Hash of the resolved configuration, 0 for NULL.
 *
 * # Safety
 * `sim` must be NULL or a live simulator handle.
 */
uint64_t shsim_simulator_config_hash(const struct ShsimSimulator *sim);

/**
 * Integrate trajectory number `trajectory` of the ensemble.
 *
 * # Safety
 * `sim` must be a live simulator handle and `out` a valid pointer.
 */
enum ShsimStatus shsim_simulator_run(const struct ShsimSimulator *sim,
                                     uint64_t trajectory,
                                     struct ShsimTrajectory **out);

/**
 * Deterministic probe suite as JSON lines. Release with [`shsim_string_free`].
 *
 * # Safety
 * `sim` must be a live simulator handle and `out` a valid pointer.
 */
enum ShsimStatus shsim_simulator_verify(const struct ShsimSimulator *sim, char **out);

/**
 * # Safety
 * `sim` must be NULL or come from a `shsim_simulator_from_*` call, and must
 * not be used afterwards.
 */
void shsim_simulator_free(struct ShsimSimulator *sim);

/**
 * Number of recorded states, 0 for NULL.
 *
 * # Safety
 * `traj` must be NULL or a live trajectory handle.
 */
size_t shsim_trajectory_len(const struct ShsimTrajectory *traj);

/**
 * Copy the recorded times into `buf`, which must hold `shsim_trajectory_len` values.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
enum ShsimStatus shsim_trajectory_times(const struct ShsimTrajectory *traj,
                                        double *buf,
                                        size_t len);

/**
 * Copy the coefficients of state `index` into `buf` of `shsim_simulator_dim` values.
 *
 * # Safety
 * `buf` must be valid for `len` writes.
 */
enum ShsimStatus shsim_trajectory_state(const struct ShsimTrajectory *traj,
                                        size_t index,
                                        double *buf,
                                        size_t len);

/**
 * # Safety
 * `traj` must be a live trajectory handle and `out` a valid pointer.
 */
enum ShsimStatus shsim_trajectory_diagnostics(const struct ShsimTrajectory *traj,
                                              size_t index,
                                              struct ShsimDiagnostics *out);

/**
 * # Safety
 * `traj` must be NULL or come from [`shsim_simulator_run`], and must not be
 * used afterwards.
 */
void shsim_trajectory_free(struct ShsimTrajectory *traj);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void shsim_string_free(char *s);

/**
 * `|(I - Z_n) F(u_n)|` on `(0, length)` for the sine coefficients `coeffs`,
 * which must vanish beyond index `n_galerkin`.
 *
 * # Safety
 * `coeffs` must be valid for `n_coeffs` reads and `out` a valid pointer.
 */
enum ShsimStatus shsim_commutation_defect(const double *coeffs,
                                          size_t n_coeffs,
                                          double length,
                                          size_t n_galerkin,
                                          uint32_t n_exp,
                                          double a,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHSIM_H */
