#ifndef H2XH2_H
#define H2XH2_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum H2Status {
  H2_STATUS_OK = 0,
  H2_STATUS_NULL_POINTER = 1,
  H2_STATUS_INVALID_ARGUMENT = 2,
  H2_STATUS_GEOMETRY = 3,
  H2_STATUS_FOCAL_POINT = 4,
  H2_STATUS_PANIC = 5,
} H2Status;

typedef enum H2ModelKind {
  /**
   * Parameter: `kappa_gamma`.
   */
  H2_MODEL_KIND_GAMMA = 0,
  /**
   * Parameter: `c`.
   */
  H2_MODEL_KIND_ONE_ONE = 1,
  /**
   * Parameter: `c`.
   */
  H2_MODEL_KIND_ONE_MINUS_ONE = 2,
  /**
   * Parameter: `tau`.
   */
  H2_MODEL_KIND_TAU = 3,
} H2ModelKind;

/**
 * Opaque model handle.
 */
typedef struct H2Model H2Model;

/**
 * Pointwise data at one chart point. `x` and `normal` are stacked
 * `(p, q)` in `R^3 x R^3`; `lambdas` are ascending.
 */
typedef struct H2PointGeometry {
  double x[6];
  double normal[6];
  double lambdas[3];
  double c;
  double h;
  double rho;
  double k;
} H2PointGeometry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *h2xh2_version(void);

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *h2xh2_last_error(void);

/**
 * Builds one of the one-parameter families.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum H2Status h2xh2_model_new(enum H2ModelKind kind, double param, struct H2Model **out);

/**
 * Builds a product of two constant-curvature curves.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum H2Status h2xh2_model_new_kk(double c, double kappa, double kappa_tilde, struct H2Model **out);

/**
 * Builds a model from its JSON description, e.g. `{"kind":"M_tau","tau":-2}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum H2Status h2xh2_model_from_json(const char *json, struct H2Model **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `m` must come from one of the constructors and not be used afterwards.
 */
void h2xh2_model_free(struct H2Model *m);

/**
 * Chart box of the model.
 *
 * # Safety
 * `lo` and `hi` must each be valid for three writes.
 */
enum H2Status h2xh2_model_domain(const struct H2Model *m, double *lo, double *hi);

/**
 * Pointwise geometry at chart point `u[3]`.
 *
 * # Safety
 * `u` must be valid for three reads and `out` for one write.
 */
enum H2Status h2xh2_point_geometry(const struct H2Model *m,
                                   const double *u,
                                   struct H2PointGeometry *out);

/**
 * Mean curvature of the parallel hypersurface at distance `l`.
 *
 * # Safety
 * `u` must be valid for three reads and `out` for one write.
 */
enum H2Status h2xh2_parallel_mean_curvature(const struct H2Model *m,
                                            const double *u,
                                            double l,
                                            double *out);

/**
 * Closed-form `d^k det Q / dl^k` at `l = 0` for `k = 1, 2, 4, 6, 8`.
 *
 * # Safety
 * `u` must be valid for three reads and `out` for five writes.
 */
enum H2Status h2xh2_detq_derivatives(const struct H2Model *m, const double *u, double *out);

/**
 * Runs the identity suite for a JSON configuration and returns the JSON
 * report in `*report` (free with [`h2xh2_string_free`]). `*all_passed` is
 * set to whether every non-informational check passed.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report` and `all_passed`
 * must be valid for writes.
 */
enum H2Status h2xh2_verify(const char *config_json, char **report, bool *all_passed);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void h2xh2_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* H2XH2_H */
