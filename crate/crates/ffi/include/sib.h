#ifndef SIB_H
#define SIB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by all functions.
typedef enum SibStatus {
  SIB_OK = 0,
  SIB_ERR_NULL_POINTER = 1,
  SIB_ERR_INVALID_ARGUMENT = 2,
  SIB_ERR_GRID_MISMATCH = 3,
  SIB_ERR_NUMERICAL_ABORT = 4,
  SIB_ERR_NO_CONVERGENCE = 5,
  SIB_ERR_CONFIG = 6,
  SIB_ERR_IO = 7,
  SIB_ERR_BUFFER_TOO_SMALL = 8,
  SIB_ERR_PANIC = 9,
} SibStatus;

// Which field of the state to copy out.
typedef enum SibField {
  // Complex envelope, interleaved real and imaginary parts.
  SIB_FIELD_U = 0,
  SIB_FIELD_V = 1,
  SIB_FIELD_VT = 2,
} SibField;

// Opaque simulation handle.
typedef struct SibSimulation SibSimulation;

// Scalar diagnostics at the current time; unavailable entries are NaN.
typedef struct SibDiagnostics {
  double t;
  double charge;
  double energy_eps;
  double modified_energy;
  double h1_u;
  double h2_u;
  double l2_v;
  double h1_v;
  double l2_vt;
  double hm_half_vt;
  double gn_quotient;
  double envelope_h1;
  double envelope_small;
} SibDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message of this thread, excluding the terminator.
size_t sib_last_error_length(void);

// Copy the last error message into `buf` (NUL-terminated, truncated to `len`).
// Returns the number of bytes written excluding the terminator.
//
// # Safety
// `buf` must point to at least `len` writable bytes.
size_t sib_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *sib_version(void);

// Create a simulation of the standard data `φ = ψ₀ = sin(πx/lx) sin(πy/ly)`,
// `ψ₁ = 0`. `yosida_n = 0` runs the unregularized system; `c0` enters the
// envelope diagnostics only.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SibStatus sib_simulation_new(double lx,
                                  double ly,
                                  size_t nx,
                                  size_t ny,
                                  double eps,
                                  double dt,
                                  uint64_t yosida_n,
                                  double c0,
                                  struct SibSimulation **out);

// Create a simulation from a TOML configuration document.
//
// # Safety
// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
enum SibStatus sib_simulation_new_from_config(const char *config_toml,
                                              double c0,
                                              struct SibSimulation **out);

// Release a handle; null is ignored.
//
// # Safety
// `sim` must come from `sib_simulation_new*` and not be used afterwards.
void sib_simulation_free(struct SibSimulation *sim);

// Advance by `steps` splitting steps of the configured size.
//
// # Safety
// `sim` must be a live handle.
enum SibStatus sib_simulation_step(struct SibSimulation *sim, uint64_t steps);

// Current simulation time.
//
// # Safety
// `sim` must be a live handle and `t` writable.
enum SibStatus sib_simulation_time(const struct SibSimulation *sim, double *t);

// Grid dimensions `nx`, `ny` of the simulation.
//
// # Safety
// `sim` must be a live handle; `nx`, `ny` writable.
enum SibStatus sib_simulation_shape(const struct SibSimulation *sim, size_t *nx, size_t *ny);

// Evaluate the monitored functionals at the current state.
//
// # Safety
// `sim` must be a live handle and `out` writable.
enum SibStatus sib_simulation_diagnostics(const struct SibSimulation *sim,
                                          struct SibDiagnostics *out);

// Copy eigen-coefficients of one field into `buf`, `k` fastest. `u` needs
// `2·nx·ny` doubles (re, im interleaved); `v` and `vt` need `nx·ny`.
//
// # Safety
// `sim` must be a live handle and `buf` hold `len` doubles.
enum SibStatus sib_simulation_coefficients(const struct SibSimulation *sim,
                                           enum SibField field,
                                           double *buf,
                                           size_t len);

// Estimate the sharp Gagliardo–Nirenberg constant on an `nx × ny` grid over `(0, lx) × (0, ly)`.
//
// # Safety
// `c0` and `converged` must be writable (`converged` may be null).
enum SibStatus sib_estimate_c0(double lx,
                               double ly,
                               size_t nx,
                               size_t ny,
                               size_t max_iter,
                               double tol,
                               double *c0,
                               int *converged);

// Run a batch command (`run`, `sweep-eps`, `sweep-n`, `check`, `estimate-c0`,
// `order-test`) with list arguments taken from the configuration. The command's
// exit code (0 pass, 1 assertion failure, 2 invalid configuration, 3 numerical
// abort) is stored in `exit_code`.
//
// # Safety
// String arguments must be NUL-terminated; `config_toml` may be null for defaults.
enum SibStatus sib_run_command(const char *command,
                               const char *config_toml,
                               const char *out_dir,
                               int *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIB_H */
