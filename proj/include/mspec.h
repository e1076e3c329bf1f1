/* C interface to the perturbed-spectrum representation library.
 *
 * Conventions:
 *  - Every fallible call returns an mspec_status; 0 is success.
 *  - On failure, mspec_last_error() returns a message for the calling thread.
 *  - Results are heap-allocated NUL-terminated strings (JSON or CSV
 *    documents) written to the out parameter; release them with
 *    mspec_string_free. Out parameters are untouched on failure.
 *  - Shift profiles are addressed by name: "default" or "paper".
 */
#ifndef MSPEC_H
#define MSPEC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MSPEC_OK = 0,
  MSPEC_ERR_INVALID_ARGUMENT = 1, /* bad parameters or malformed documents */
  MSPEC_ERR_RUNTIME = 2,          /* algorithmic or internal failure */
} mspec_status;

const char* mspec_version(void);
const char* mspec_last_error(void);
void mspec_string_free(char* s);

/* Caps worker threads for parallel sections; 0 restores hardware default.
 * Results never depend on the thread count. */
void mspec_set_threads(int threads);

/* ---- perturbed spectrum ------------------------------------------------ */

typedef struct mspec_spectrum mspec_spectrum;

/* law_kind: "constant" (half-width d) or "power" (d * (1+|n|)^-alpha). */
mspec_status mspec_spectrum_create(uint64_t seed, const char* law_kind,
                                   double d, double alpha,
                                   mspec_spectrum** out);
mspec_status mspec_spectrum_from_json(const char* text, mspec_spectrum** out);
mspec_status mspec_spectrum_to_json(const mspec_spectrum* spectrum,
                                    char** out_json);
void mspec_spectrum_free(mspec_spectrum* spectrum);

/* Perturbation r(n) of the frequency lambda(n) = n + r(n). */
mspec_status mspec_spectrum_offset(const mspec_spectrum* spectrum, int64_t n,
                                   double* out_offset);

/* First l in [l_min, l_max] whose (k, l) block condition holds with the given
 * tolerance, skipping blocks that start inside exclude_reach. Result JSON:
 * {"found": bool, "l": int, "condition": {...}} (condition of the found l). */
mspec_status mspec_spectrum_scan(const mspec_spectrum* spectrum, int64_t k,
                                 int64_t l_min, int64_t l_max,
                                 const char* profile, double tolerance,
                                 int64_t exclude_reach, char** out_json);

/* Plants a witness block; returns its record as JSON. */
mspec_status mspec_spectrum_plant(mspec_spectrum* spectrum, int64_t k,
                                  int64_t l, const char* profile,
                                  double jitter, double tolerance,
                                  char** out_json);

/* Monte Carlo + analytic probability that a fresh block of size k satisfies
 * the condition. Result JSON carries p_hat, p_analytic, Wilson bounds. */
mspec_status mspec_estimate_block_probability(int64_t k, const char* profile,
                                              double tolerance, double d,
                                              uint64_t trials, uint64_t seed,
                                              char** out_json);

/* ---- correction polynomials -------------------------------------------- */

/* strategy: "minimax" or "analytic". Result JSON: {"success": bool,
 * "rounds": int, "lp_iterations": int, "diagnostics": string,
 * "correction": {poly, targets, certificate}}. */
mspec_status mspec_build_correction(double eps, double delta,
                                    const char* strategy, size_t degree_budget,
                                    double margin, int max_rounds,
                                    size_t oversample,
                                    size_t analytic_degree_cap,
                                    char** out_json);

/* Independent certificate for a serialized polynomial ({"terms": [...]}). */
mspec_status mspec_verify_correction(const char* poly_json, double eps,
                                     double delta, size_t oversample,
                                     char** out_json);

/* ---- targets and fitting ------------------------------------------------ */

/* Samples a named preset target on [-half_length, half_length]; CSV x,re,im. */
mspec_status mspec_sample_preset(const char* name, double half_length,
                                 double step, const char* profile,
                                 char** out_csv);

/* Fits the sampled target (CSV x,re,im) in measure by shifted-integer
 * exponentials. Result JSON: {"report": {...}, "poly": {...}}. */
mspec_status mspec_fit(const char* target_csv, double eta, double mu,
                       const char* profile, int64_t max_degree,
                       char** out_json);

/* ---- staged representation ---------------------------------------------- */

/* config JSON:
 * {
 *   "seed": 1, "law": {"kind": "constant", "d": 0.5, "alpha": 0},
 *   "profile": "default",
 *   "target": {"preset": "step"} | {"samples_csv": "x,re,im\n..."},
 *   "schedule": { partial or full schedule document },
 *   "stages": 4
 * }
 * Result JSON: {"success": bool, "failure": {"phase", "message"} | null,
 * "stages_completed": int, "state": {...}, "trace_csv": "...",
 * "coefficients_csv": "..."}. Completed stages are reported even when a
 * later stage fails. */
mspec_status mspec_represent(const char* config_json, char** out_json);

/* Re-derives a completed run's guarantees from its state document. Result
 * JSON: {"pass": bool, "report": {...}, "trace_csv": "..."}. */
mspec_status mspec_verify_state(const char* state_json, char** out_json);

/* ---- smoothing counterexample ------------------------------------------- */

/* Convergence of k-fold difference-smoothed series for coefficient growth
 * n^beta against offsets c * n^-alpha, for k = 1..k_max. Result JSON:
 * {"k_min": int, "reports": [{...} per k]}. */
mspec_status mspec_counterexample(double beta, double alpha, int k_max,
                                  double c, int64_t tail_start,
                                  char** out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MSPEC_H */
