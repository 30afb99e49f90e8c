#ifndef STEREORECT_H
#define STEREORECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_INPUT = 2,
  SR_STATUS_INSUFFICIENT_INLIERS = 3,
  SR_STATUS_DEGENERATE = 4,
  SR_STATUS_SOLVER_FAILURE = 5,
  SR_STATUS_PANIC = 6,
} SrStatus;

typedef enum SrMode {
  SR_MODE_USR = 0,
  SR_MODE_USR_CGD = 1,
} SrMode;

/*
 Opaque set of point matches.
 */
typedef struct SrCorrespondences SrCorrespondences;

/*
 Opaque solver result.
 */
typedef struct SrSolution SrSolution;

typedef struct SrRansacOptions {
  uint32_t max_iterations;
  /*
   Sampson distance in pixels.
   */
  double inlier_threshold;
  double confidence;
  uint64_t seed;
} SrRansacOptions;

/*
 Averaged distortion measures of a solution; angles in degrees.
 */
typedef struct SrReport {
  double e_s;
  double e_v;
  double e_o;
  double e_a;
  double e_ar;
  double e_sk;
  double e_r;
  double e_sr;
} SrReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a correspondence set from `n_pairs` rows of `(ul, vl, ur, vr)`.

 # Safety
 `pairs` must point to `4 * n_pairs` doubles and `out` must be writable.
 */
enum SrStatus sr_correspondences_new(uint32_t width,
                                     uint32_t height,
                                     const double *pairs,
                                     size_t n_pairs,
                                     struct SrCorrespondences **out);

/*
 # Safety
 `c` must come from this library and not be used afterwards. Null is ignored.
 */
void sr_correspondences_free(struct SrCorrespondences *c);

/*
 Number of pairs, or 0 for a null handle.

 # Safety
 `c` must be null or a live handle.
 */
size_t sr_correspondences_len(const struct SrCorrespondences *c);

/*
 Copies pair `index` into `out[4]`.

 # Safety
 `c` must be a live handle and `out` must hold four doubles.
 */
enum SrStatus sr_correspondences_get(const struct SrCorrespondences *c, size_t index, double *out);

struct SrRansacOptions sr_ransac_default_options(void);

/*
 RANSAC outlier rejection. Writes a new handle with the inliers to
 `inliers_out` and, if `f_out` is not null, the refit fundamental matrix.

 # Safety
 Pointers must be valid; `f_out` may be null or hold nine doubles.
 */
enum SrStatus sr_ransac_filter(const struct SrCorrespondences *c,
                               const struct SrRansacOptions *options,
                               struct SrCorrespondences **inliers_out,
                               double *f_out);

/*
 Estimates rectifying homographies from (already filtered) matches.

 # Safety
 `c` must be a live handle and `out` writable.
 */
enum SrStatus sr_solve(const struct SrCorrespondences *c,
                       enum SrMode mode,
                       struct SrSolution **out);

/*
 # Safety
 `s` must come from [`sr_solve`] and not be used afterwards. Null is ignored.
 */
void sr_solution_free(struct SrSolution *s);

/*
 Writes `H_l` and `H_r`, each nine doubles row-major.

 # Safety
 `s` must be a live handle; both outputs must hold nine doubles.
 */
enum SrStatus sr_solution_homographies(const struct SrSolution *s, double *h_left, double *h_right);

/*
 Writes the nine parameters in the order θ_yl, θ_zl, θ_xr, θ_yr, θ_zr, t_yl, t_yr, δ_fl, δ_fr.

 # Safety
 `s` must be a live handle; `out` must hold nine doubles.
 */
enum SrStatus sr_solution_params(const struct SrSolution *s,
                                 double *out);

/*
 # Safety
 `s` must be a live handle; `out` writable.
 */
enum SrStatus sr_solution_report(const struct SrSolution *s, struct SrReport *out);

/*
 Number of accepted outer rounds, or 0 for a null handle.

 # Safety
 `s` must be null or a live handle.
 */
size_t sr_solution_rounds(const struct SrSolution *s);

/*
 Sampson error of `f` (nine doubles, row-major) over `c`.

 # Safety
 `f` must hold nine doubles, `c` must be a live handle and `out` writable.
 */
enum SrStatus sr_sampson_error(const double *f, const struct SrCorrespondences *c, double *out);

/*
 Message of the last failure on this thread, or null if none. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *sr_last_error_message(void);

/*
 Library version as a static nul-terminated string.
 */
const char *sr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEREORECT_H */
