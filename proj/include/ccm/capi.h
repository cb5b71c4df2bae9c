#ifndef CCM_CAPI_H_
#define CCM_CAPI_H_

/* C interface to the covariance-reconstruction simulator. A ccm_experiment
 * handle carries a configuration, is run once, and then serves CSV results.
 * All strings returned as char* are heap copies owned by the caller; release
 * them with ccm_string_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ccm_status {
  CCM_OK = 0,
  CCM_ERR_INVALID_ARG = 1, /* null handle, bad dimensions, bad combination */
  CCM_ERR_BAD_KEY = 2,     /* unknown configuration key */
  CCM_ERR_BAD_VALUE = 3,   /* key known, value out of range */
  CCM_ERR_IO = 4,          /* unparseable CSV input */
  CCM_ERR_NUMERIC = 5,     /* numerical failure inside the solver/designer */
  CCM_ERR_INFEASIBLE = 6,  /* feedback-consistent set has no interior */
  CCM_ERR_STATE = 7,       /* results requested before a successful run */
  CCM_ERR_INTERNAL = 8
} ccm_status;

typedef struct ccm_experiment ccm_experiment;

const char* ccm_version(void);

ccm_experiment* ccm_experiment_new(void);
void ccm_experiment_free(ccm_experiment* exp);

/* Integer keys: na, np, nu, codebook_m, rounds, trials, seed, n_paths,
 * b_hist_probes, baseline (0/1), solver_trace (0/1).
 * Real keys: ceq_db (+inf for error-free), lambda, epsilon_db,
 * b_hist_perturbation, audit_tol.
 * String keys: m_prime (random|reuse|mixture), sigma (equality|sampled),
 * x (designed|random), b_mode (trace|frob|historical). */
ccm_status ccm_set_int(ccm_experiment* exp, const char* key, int64_t value);
ccm_status ccm_set_real(ccm_experiment* exp, const char* key, double value);
ccm_status ccm_set_string(ccm_experiment* exp, const char* key,
                          const char* value);

/* Ground-truth covariance as n^2 CSV rows of "re,im", row-major; replaces
 * the synthetic channel. Must match the configured na at run time. */
ccm_status ccm_load_ccm_csv(ccm_experiment* exp, const char* csv_text);

ccm_status ccm_run(ccm_experiment* exp);

/* Valid after a successful ccm_run; NULL otherwise. */
char* ccm_trajectory_csv(const ccm_experiment* exp);
char* ccm_aggregate_csv(const ccm_experiment* exp);
/* Per-iteration solver log of trial 0; empty unless solver_trace=1. */
char* ccm_solver_trace_csv(const ccm_experiment* exp);
int ccm_failed_trials(const ccm_experiment* exp);

/* Message for the most recent failing call; owned by the handle. */
const char* ccm_last_error(const ccm_experiment* exp);

/* Standalone codebook dump (header m,re0,im0,...); NULL on bad sizes. */
char* ccm_codebook_csv(int n_p, int oversampling);

void ccm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CCM_CAPI_H_ */
