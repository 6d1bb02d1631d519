#ifndef WAVEMODELS_H
#define WAVEMODELS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WmStatus {
  WM_STATUS_OK = 0,
  WM_STATUS_NULL_POINTER = 1,
  WM_STATUS_INVALID_ARGUMENT = 2,
  WM_STATUS_CONFIG_ERROR = 3,
  WM_STATUS_NUMERIC_ERROR = 4,
  WM_STATUS_EVENT_STOP = 5,
  WM_STATUS_PANIC = 6,
} WmStatus;

typedef enum WmSymbol {
  // `-i sgn(k)`.
  WM_SYMBOL_HILBERT = 0,
  // `|k|^p0`.
  WM_SYMBOL_LAMBDA_POW = 1,
  // `(ik)^m` with `m = p0` (a non-negative integer).
  WM_SYMBOL_DERIVATIVE = 2,
  // Resolvent with `alpha1 = p0`, `alpha2 = p1`.
  WM_SYMBOL_RESOLVENT_N = 3,
  // `1 / (2 + p0 |k|)`.
  WM_SYMBOL_RESOLVENT_M = 4,
  // `1 / (1 + k²)`.
  WM_SYMBOL_RESOLVENT_P = 5,
} WmSymbol;

// Periodic collocation grid.
typedef struct WmGrid WmGrid;

// A configured model with its current time and state.
typedef struct WmSimulation WmSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *wm_version(void);

// Copies the calling thread's last error message into `buf` (truncated,
// always NUL-terminated when `len > 0`). Returns the full message length
// in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t wm_last_error(char *buf, size_t len);

// Creates a grid of `n_nodes` points on a period of `length`.
//
// # Safety
// `out` must be a valid pointer.
enum WmStatus wm_grid_new(size_t n_nodes, double length, struct WmGrid **out);

// # Safety
// `grid` must be null or come from [`wm_grid_new`] and not be freed twice.
void wm_grid_free(struct WmGrid *grid);

// # Safety
// `grid` must be null or a live grid handle.
size_t wm_grid_n_nodes(const struct WmGrid *grid);

// Writes the `n_nodes` grid points into `out`.
//
// # Safety
// `out` must hold `n_nodes` doubles.
enum WmStatus wm_grid_nodes(const struct WmGrid *grid, double *out);

// Applies a Fourier multiplier to the nodal values `f`, writing to `out`.
// `p0` and `p1` are the symbol parameters (ignored where unused).
//
// # Safety
// `f` and `out` must each hold `n_nodes` doubles; they may alias.
enum WmStatus wm_apply_symbol(const struct WmGrid *grid,
                              enum WmSymbol symbol,
                              double p0,
                              double p1,
                              const double *f,
                              double *out);

// Two-thirds-rule product of `f` and `g`.
//
// # Safety
// `f`, `g` and `out` must each hold `n_nodes` doubles.
enum WmStatus wm_dealiased_product(const struct WmGrid *grid,
                                   const double *f,
                                   const double *g,
                                   double *out);

// Sobolev `H^s` norm of `f`.
//
// # Safety
// `f` must hold `n_nodes` doubles; `out` must be valid.
enum WmStatus wm_sobolev_norm(const struct WmGrid *grid, const double *f, double s, double *out);

// Weighted Wiener norm `Σ e^{ν|k|} |f̂(k)|`.
//
// # Safety
// `f` must hold `n_nodes` doubles; `out` must be valid.
enum WmStatus wm_wiener_norm(const struct WmGrid *grid, const double *f, double nu, double *out);

// Builds a simulation at `t = 0` from TOML configuration text (the same
// schema the command line reads; `t_max` and sampling are ignored).
//
// # Safety
// `config` must be a NUL-terminated string and `out` a valid pointer.
enum WmStatus wm_simulation_from_config(const char *config, struct WmSimulation **out);

// Builds a simulation from a named scenario preset.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum WmStatus wm_simulation_from_preset(const char *name, struct WmSimulation **out);

// # Safety
// `sim` must be null or a live simulation handle, freed at most once.
void wm_simulation_free(struct WmSimulation *sim);

// Integrates forward by `dt`. Returns [`WmStatus::EventStop`] when a
// configured stop condition fires; the state is then left at the stopping
// time and further calls keep returning `EventStop`.
//
// # Safety
// `sim` must be a live simulation handle.
enum WmStatus wm_simulation_advance(struct WmSimulation *sim, double dt);

// # Safety
// `sim` must be null or a live simulation handle.
double wm_simulation_time(const struct WmSimulation *sim);

// Number of doubles in the state vector: the model's fields, each of
// `n_nodes` values, concatenated in the order of the snapshot columns.
//
// # Safety
// `sim` must be null or a live simulation handle.
size_t wm_simulation_state_len(const struct WmSimulation *sim);

// Copies the current state into `out`, which must hold `len` doubles with
// `len` equal to [`wm_simulation_state_len`].
//
// # Safety
// `sim` must be a live handle and `out` must hold `len` doubles.
enum WmStatus wm_simulation_copy_state(const struct WmSimulation *sim, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEMODELS_H */
