#ifndef LGI_H
#define LGI_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LgiStatus {
  LGI_STATUS_OK = 0,
  LGI_STATUS_NULL_POINTER = 1,
  LGI_STATUS_INVALID_PARAMETER = 2,
  LGI_STATUS_NOT_CONVERGED = 3,
  LGI_STATUS_SINGULAR_INTERVAL = 4,
  LGI_STATUS_UNSUPPORTED = 5,
  LGI_STATUS_PANIC = 6,
  LGI_STATUS_BRANCH_UNREACHABLE = 7,
  LGI_STATUS_IO = 8,
} LgiStatus;

/*
 Opaque engine handle.
 */
typedef struct LgiEngine LgiEngine;

/*
 Opaque result of one evaluation of `C`.
 */
typedef struct LgiEvaluation LgiEvaluation;

/*
 Laboratory parameters: amu, rad/s, kg m/s, s, s.
 */
typedef struct LgiPhysical {
  double mass_amu;
  double omega;
  double p0;
  double t1;
  double dt;
} LgiPhysical;

typedef struct LgiDimensionless {
  double p_tilde;
  double tau1;
  double dtau;
} LgiDimensionless;

/*
 Joint probabilities `P(a, b)`, `+` meaning `x < 0`.
 */
typedef struct LgiJointTable {
  double p_pp;
  double p_pm;
  double p_mp;
  double p_mm;
} LgiJointTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread; empty after a success.
 Valid until the next call into this library on the same thread.
 */
const char *lgi_last_error(void);

/*
 Static description of a status code; takes the raw value so any integer
 is safe to pass.
 */
const char *lgi_status_string(int32_t status);

/*
 # Safety
 `input` and `out` must be valid pointers.
 */
enum LgiStatus lgi_to_dimensionless(const struct LgiPhysical *input, struct LgiDimensionless *out);

/*
 Probability of outcome `+` (particle at `x < 0`) at phase `tau`.

 # Safety
 `out` must be a valid pointer.
 */
enum LgiStatus lgi_marginal_plus(double p_tilde, double tau, double *out);

/*
 Faddeeva function `w(z) = exp(-z^2) erfc(-i z)`.

 # Safety
 `out_re` and `out_im` must be valid pointers.
 */
enum LgiStatus lgi_faddeeva_w(double re, double im, double *out_re, double *out_im);

/*
 Closed-form engine. Non-positive tolerances select the defaults.

 # Safety
 `out` must be a valid pointer; the handle is released with
 [`lgi_engine_free`].
 */
enum LgiStatus lgi_engine_new_analytic(double rel_tol, double abs_tol, struct LgiEngine **out);

/*
 Split-operator grid engine. `min_points == 0` selects the default.

 # Safety
 `out` must be a valid pointer; the handle is released with
 [`lgi_engine_free`].
 */
enum LgiStatus lgi_engine_new_grid(size_t min_points,
                                   double smearing,
                                   bool richardson,
                                   struct LgiEngine **out);

/*
 # Safety
 `engine` must come from an `lgi_engine_new_*` call and not be used
 afterwards. Null is ignored.
 */
void lgi_engine_free(struct LgiEngine *engine);

/*
 Joint probabilities of outcomes at phases `tau_i < tau_j`.

 # Safety
 `engine` must be a live handle and `out` a valid pointer.
 */
enum LgiStatus lgi_joint_table(const struct LgiEngine *engine,
                               double p_tilde,
                               double tau_i,
                               double tau_j,
                               struct LgiJointTable *out);

/*
 `C` on the uniform schedule of `params`.

 # Safety
 `engine` must be a live handle, `params` and `out` valid pointers. The
 result is released with [`lgi_evaluation_free`].
 */
enum LgiStatus lgi_compute(const struct LgiEngine *engine,
                           const struct LgiDimensionless *params,
                           struct LgiEvaluation **out);

/*
 `C` maximized over the schedule at fixed `p_tilde`.

 # Safety
 As for [`lgi_compute`].
 */
enum LgiStatus lgi_maximize(const struct LgiEngine *engine,
                            double p_tilde,
                            struct LgiEvaluation **out);

/*
 # Safety
 `eval` must be a live handle, `out` a valid pointer.
 */
enum LgiStatus lgi_evaluation_c(const struct LgiEvaluation *eval, double *out);

/*
 Schedule actually evaluated (after maximization, the optimum).

 # Safety
 `eval` must be a live handle, `out` a valid pointer.
 */
enum LgiStatus lgi_evaluation_params(const struct LgiEvaluation *eval,
                                     struct LgiDimensionless *out);

/*
 `C12, C23, C34, C14` into `out[0..4]`.

 # Safety
 `eval` must be a live handle and `out` point to four doubles.
 */
enum LgiStatus lgi_evaluation_correlators(const struct LgiEvaluation *eval, double *out);

/*
 Joint table of pair `index` (0: (1,2), 1: (2,3), 2: (3,4), 3: (1,4)).

 # Safety
 `eval` must be a live handle, `out` a valid pointer.
 */
enum LgiStatus lgi_evaluation_joint_table(const struct LgiEvaluation *eval,
                                          size_t index,
                                          struct LgiJointTable *out);

/*
 # Safety
 `eval` must come from [`lgi_compute`] or [`lgi_maximize`] and not be
 used afterwards. Null is ignored.
 */
void lgi_evaluation_free(struct LgiEvaluation *eval);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGI_H */
