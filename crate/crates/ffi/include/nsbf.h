#ifndef NSBF_H
#define NSBF_H

#include <stddef.h>
#include <stdint.h>

#define NSBF_OK 0

#define NSBF_ERR_NULL_POINTER 1

#define NSBF_ERR_INVALID_ARGUMENT 2

#define NSBF_ERR_INVALID_MESH 3

#define NSBF_ERR_DOMAIN 4

#define NSBF_ERR_RANGE 5

#define NSBF_ERR_NON_FINITE 6

#define NSBF_ERR_CONVERGENCE 7

#define NSBF_ERR_NON_VANISHING 8

#define NSBF_ERR_BREAKDOWN 9

#define NSBF_ERR_EVALUATION 10

#define NSBF_ERR_INSUFFICIENT_DATA 11

#define NSBF_ERR_IO 12

#define NSBF_ERR_BUFFER_TOO_SMALL 13

#define NSBF_ERR_PANIC 14

#define NSBF_BOUNDARY_DIRICHLET 0

#define NSBF_BOUNDARY_NEUMANN 1

#define NSBF_BOUNDARY_ROBIN 2

// Opaque solver handle.
typedef struct NsbfSolver NsbfSolver;

// Truncation data of a solver.
typedef struct NsbfTruncation {
  // Number of computed coefficients minus one.
  size_t n;
  size_t n_opt;
  size_t n_opt_beta;
  size_t n_opt_gamma;
  double beta_floor;
  double gamma_floor;
  // 1 when both residuals reached a plateau.
  int32_t converged;
} NsbfTruncation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a solver for a named potential (`"x^2"`, `"1/x"`, `"zero"`,
// `"const:c"`, `"sqrt(pi^2-x^2)"`, `"decay1:k"`, `"decay2:k"`,
// `"csv:path"`) on `[0, b]` with `mesh_points` nodes and `n + 1`
// coefficients.
//
// # Safety
// `potential` must be a NUL-terminated string and `out` a valid pointer.
int32_t nsbf_solver_new(const char *potential,
                        double l,
                        double b,
                        size_t mesh_points,
                        size_t n,
                        struct NsbfSolver **out);

// Builds a solver from `len` samples of `q` on the uniform mesh over
// `[0, b]` (`len` is the mesh size).
//
// # Safety
// `q` must point to `len` doubles and `out` must be a valid pointer.
int32_t nsbf_solver_from_samples(const double *q,
                                 size_t len,
                                 double l,
                                 double b,
                                 size_t n,
                                 struct NsbfSolver **out);

// Releases a solver. Null is ignored.
//
// # Safety
// `solver` must come from one of the constructors and not be used again.
void nsbf_solver_free(struct NsbfSolver *solver);

// `u(ω, x)` and `u′(ω, x)`. Either output pointer may be null.
//
// # Safety
// `solver` must be a live handle; non-null outputs must be writable.
int32_t nsbf_eval(const struct NsbfSolver *solver,
                  double omega,
                  double x,
                  double *u,
                  double *u_prime);

// `|Σ β_n(x)/x|` and `|Σ γ_n(x)/x|` at the applied truncation.
//
// # Safety
// `solver` must be a live handle; non-null outputs must be writable.
int32_t nsbf_error_indicator(const struct NsbfSolver *solver,
                             double x,
                             double *eps_beta,
                             double *eps_gamma);

// # Safety
// `solver` must be a live handle and `out` writable.
int32_t nsbf_truncation(const struct NsbfSolver *solver, struct NsbfTruncation *out);

// Writes `β_n(b)` (or `γ_n(b)` when `gamma` is nonzero) for
// `n = 0..=N` into `out`, which must hold `N + 1` values.
//
// # Safety
// `solver` must be a live handle and `out` must point to `capacity` doubles.
int32_t nsbf_coefficients_at_b(const struct NsbfSolver *solver,
                               int32_t gamma,
                               double *out,
                               size_t capacity);

// Eigenvalues in `[omega_lo, omega_hi]` for the boundary condition
// `boundary` (`NSBF_BOUNDARY_*`; `h` is used for Robin). `*count`
// receives the number found; if it exceeds `capacity` the first
// `capacity` are written and `NSBF_ERR_BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `solver` must be a live handle, `out` must point to `capacity` doubles
// (or be null when `capacity` is 0) and `count` must be writable.
int32_t nsbf_eigenvalues(const struct NsbfSolver *solver,
                         int32_t boundary,
                         double h,
                         double omega_lo,
                         double omega_hi,
                         double *out,
                         size_t capacity,
                         size_t *count);

// Message of the last failed call on this thread, or `""`. The pointer
// stays valid until the next call on the same thread.
const char *nsbf_last_error(void);

// Library version as a static NUL-terminated string.
const char *nsbf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSBF_H */
