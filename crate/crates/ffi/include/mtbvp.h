#ifndef MTBVP_H
#define MTBVP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MtbvpStatus {
  MTBVP_STATUS_OK = 0,
  MTBVP_STATUS_RUNTIME = 1,
  MTBVP_STATUS_VALIDATION = 2,
  MTBVP_STATUS_SINGULAR_MODE_WITH_DATA = 3,
  MTBVP_STATUS_CASE_NOT_TABULATED = 4,
  MTBVP_STATUS_NULL_POINTER = 5,
  MTBVP_STATUS_OUT_OF_DOMAIN = 6,
} MtbvpStatus;

// Parsed and validated problem with its run controls.
typedef struct MtbvpProblem MtbvpProblem;

// Solved series.
typedef struct MtbvpSolution MtbvpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a TOML configuration. Relative `csv:` paths resolve against the
// current directory.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum MtbvpStatus mtbvp_problem_from_toml(const char *toml, struct MtbvpProblem **out);

// # Safety
// `problem` must come from [`mtbvp_problem_from_toml`] or be NULL.
void mtbvp_problem_free(struct MtbvpProblem *problem);

// # Safety
// `problem` must be a live handle; `out` must be writable.
enum MtbvpStatus mtbvp_solve(const struct MtbvpProblem *problem, struct MtbvpSolution **out);

// `D_x^dx D_y^dy u(x, y)`.
//
// # Safety
// `solution` must be a live handle; `out` must be writable.
enum MtbvpStatus mtbvp_solution_eval(const struct MtbvpSolution *solution,
                                     double x,
                                     double y,
                                     uint32_t dx,
                                     uint32_t dy,
                                     double *out);

// Number of modes that enter the sum.
//
// # Safety
// `solution` must be a live handle; `out` must be writable.
enum MtbvpStatus mtbvp_solution_modes(const struct MtbvpSolution *solution, uint64_t *out);

// # Safety
// `solution` must come from [`mtbvp_solve`] or be NULL.
void mtbvp_solution_free(struct MtbvpSolution *solution);

// Phase of the asymptotic denominator in radians.
//
// # Safety
// `phase_out` must be writable.
enum MtbvpStatus mtbvp_classify_phase(uint32_t two_n,
                                      uint32_t gamma,
                                      uint32_t q,
                                      double *phase_out);

// Separation check for `a/pi = num/den`. `separated` receives 1 or 0 and
// `delta1` the bound (NaN when not separated).
//
// # Safety
// Output pointers must be writable.
enum MtbvpStatus mtbvp_separation_check(uint64_t num,
                                        uint64_t den,
                                        uint32_t two_n,
                                        uint32_t gamma,
                                        uint32_t q,
                                        int32_t *separated,
                                        double *delta1);

// Minimum of `k^(b + b eps) |sin(pi k^b tau + phase)|` over `k <= k_max`
// for a tagged irrational `tau` such as `"sqrt2"`.
//
// # Safety
// `tau` must be a NUL-terminated string; `min_w` must be writable.
enum MtbvpStatus mtbvp_diophantine_floor(const char *tau,
                                         uint32_t two_n,
                                         uint32_t gamma,
                                         uint32_t q,
                                         uint32_t b,
                                         double epsilon,
                                         uint64_t k_max,
                                         double *min_w);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into the library on the same thread.
const char *mtbvp_last_error_message(void);

// Library version, static storage.
const char *mtbvp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTBVP_H */
