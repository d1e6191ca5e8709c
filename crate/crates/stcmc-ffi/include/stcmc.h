#ifndef STCMC_H
#define STCMC_H

/* Generated by cbindgen from crates/stcmc-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of values per row of a charge table:
 * `radius, E, P1..3, CBOM1..3, Z1..3, CSTCMC1..3, V1..3`.
 */
#define STCMC_CHARGE_COLUMNS 17

typedef enum StcmcStatus {
  STCMC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  STCMC_STATUS_NULL_POINTER = 1,
  /**
   * Bad parameters: the same class the command line reports with exit code 2.
   */
  STCMC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A well-posed request failed numerically.
   */
  STCMC_STATUS_NUMERICAL_FAILURE = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  STCMC_STATUS_PANIC = 4,
} StcmcStatus;

/**
 * Per-radius charges and their extrapolated limits.
 */
typedef struct StcmcChargeTable StcmcChargeTable;

/**
 * Initial data set.
 */
typedef struct StcmcProvider StcmcProvider;

/**
 * Solved STCMC surface with its solve diagnostics.
 */
typedef struct StcmcSurface StcmcSurface;

/**
 * Scalar summary of a solved surface.
 */
typedef struct StcmcSurfaceInfo {
  double center[3];
  double radius;
  double area_radius;
  double hawking_mass;
  double residual;
  size_t band;
  size_t iterations;
} StcmcSurfaceInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *stcmc_last_error_message(void);

/**
 * Short error name of the last failure on this thread (for example
 * `"NewtonDiverged"`), or null if none.
 */
const char *stcmc_last_error_kind(void);

void stcmc_clear_last_error(void);

/**
 * Library version, a static string.
 */
const char *stcmc_version(void);

/**
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum StcmcStatus stcmc_provider_euclidean(struct StcmcProvider **out);

/**
 * Canonical Schwarzschild slice of mass `mass`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum StcmcStatus stcmc_provider_schwarzschild(double mass, struct StcmcProvider **out);

/**
 * Graphical Schwarzschild slice with boost direction `u[0..3]`.
 *
 * # Safety
 * `u` must point to three doubles and `out` must be valid for writing.
 */
enum StcmcStatus stcmc_provider_graphical(double mass, const double *u, struct StcmcProvider **out);

/**
 * Provider from its JSON description, e.g.
 * `{"kind": "schwarzschild_canonical", "mass": 1.0}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writing.
 */
enum StcmcStatus stcmc_provider_from_json(const char *json, struct StcmcProvider **out);

/**
 * Copy of `provider` moved so that its origin sits at `center[0..3]`.
 *
 * # Safety
 * `provider` must be a live handle, `center` must point to three doubles
 * and `out` must be valid for writing.
 */
enum StcmcStatus stcmc_provider_translated(const struct StcmcProvider *provider,
                                           const double *center,
                                           struct StcmcProvider **out);

/**
 * # Safety
 * `provider` must be null or a handle not yet freed.
 */
void stcmc_provider_free(struct StcmcProvider *provider);

/**
 * Solve for the surface with spacetime mean curvature `2 / sigma`, seeded
 * by the coordinate sphere of radius `sigma` about `seed_center` (the
 * origin when null), as a radial graph of band limit `band`.
 *
 * # Safety
 * `provider` must be a live handle, `seed_center` null or three doubles,
 * and `out` valid for writing.
 */
enum StcmcStatus stcmc_solve(const struct StcmcProvider *provider,
                             double sigma,
                             size_t band,
                             double tolerance,
                             const double *seed_center,
                             struct StcmcSurface **out);

/**
 * # Safety
 * `surface` must be a live handle and `info` valid for writing.
 */
enum StcmcStatus stcmc_surface_info(const struct StcmcSurface *surface,
                                    struct StcmcSurfaceInfo *info);

/**
 * Harmonic coefficients of the height function. Writes at most `capacity`
 * values into `coeffs` and the full count into `len`; call with
 * `capacity = 0` to query the size.
 *
 * # Safety
 * `surface` must be a live handle, `coeffs` valid for `capacity` doubles
 * (or null when `capacity` is 0) and `len` valid for writing.
 */
enum StcmcStatus stcmc_surface_coefficients(const struct StcmcSurface *surface,
                                            double *coeffs,
                                            size_t capacity,
                                            size_t *len);

/**
 * # Safety
 * `surface` must be null or a handle not yet freed.
 */
void stcmc_surface_free(struct StcmcSurface *surface);

/**
 * Charges over coordinate spheres of the given radii.
 *
 * # Safety
 * `provider` must be a live handle, `radii` valid for `count` doubles and
 * `out` valid for writing.
 */
enum StcmcStatus stcmc_charges(const struct StcmcProvider *provider,
                               const double *radii,
                               size_t count,
                               struct StcmcChargeTable **out);

/**
 * # Safety
 * `table` must be a live handle and `len` valid for writing.
 */
enum StcmcStatus stcmc_charges_len(const struct StcmcChargeTable *table, size_t *len);

/**
 * Row `index` of the table, [`STCMC_CHARGE_COLUMNS`] values in the order
 * `radius, E, P1..3, CBOM1..3, Z1..3, CSTCMC1..3, V1..3`. Centers and
 * velocities are NaN when the energy vanishes.
 *
 * # Safety
 * `table` must be a live handle and `row` valid for 17 doubles.
 */
enum StcmcStatus stcmc_charges_row(const struct StcmcChargeTable *table, size_t index, double *row);

/**
 * Extrapolated energy and momentum `limits = [E, P1, P2, P3]`.
 *
 * # Safety
 * `table` must be a live handle and `limits` valid for 4 doubles.
 */
enum StcmcStatus stcmc_charges_limits(const struct StcmcChargeTable *table, double *limits);

/**
 * # Safety
 * `table` must be null or a handle not yet freed.
 */
void stcmc_charges_free(struct StcmcChargeTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STCMC_H */
