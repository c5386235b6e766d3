#ifndef UHLMANN_H
#define UHLMANN_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum UhlmannStatus {
  UHLMANN_STATUS_OK = 0,
  UHLMANN_STATUS_NULL_POINTER = 1,
  // Bad dimensions, tolerances or input values.
  UHLMANN_STATUS_INVALID_ARGUMENT = 2,
  UHLMANN_STATUS_PRECONDITION = 3,
  // A numerical self-check failed or an iteration did not settle.
  UHLMANN_STATUS_NUMERICAL = 4,
  UHLMANN_STATUS_GEOMETRY = 5,
  // A Rust panic was caught at the boundary.
  UHLMANN_STATUS_PANIC = 6,
} UhlmannStatus;

// Opaque handle to an operator algebra.
typedef struct UhlmannAlgebra UhlmannAlgebra;

typedef struct UhlmannTolerances {
  double eq_tol;
  double rank_tol;
} UhlmannTolerances;

typedef struct UhlmannVerdict {
  bool pass;
  double residual;
} UhlmannVerdict;

// Summary of the four anyon-sector states relative to a pair of patches.
typedef struct UhlmannToricClasses {
  // `|⟨Ψ_i, Ψ_j⟩|` in sector order `1, e, m, em`, row-major.
  double gram[16];
  bool gram_is_identity;
  bool b_signatures_equal;
  // Sector pairs (of 6) connectable by a Pauli supported in `A1 ∪ A2`.
  uint32_t connectable_pairs;
  uint32_t radius;
} UhlmannToricClasses;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// `eq_tol = 1e-9`, `rank_tol = 1e-10`.
struct UhlmannTolerances uhlmann_tolerances_default(void);

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *uhlmann_last_error(void);

// The algebra generated by `count` matrices of size `dim × dim`, stored
// consecutively in `generators`. `tol` may be null for the defaults.
//
// # Safety
// `generators` must hold `2·dim·dim·count` doubles (it may be null when
// `count` is 0) and `out` must be writable.
enum UhlmannStatus uhlmann_algebra_generate(size_t dim,
                                            const double *generators,
                                            size_t count,
                                            const struct UhlmannTolerances *tol,
                                            struct UhlmannAlgebra **out);

// `B(C^dim)`.
//
// # Safety
// `out` must be writable.
enum UhlmannStatus uhlmann_algebra_full(size_t dim, struct UhlmannAlgebra **out);

// # Safety
// `alg` must be null or a handle from this library that was not freed yet.
void uhlmann_algebra_free(struct UhlmannAlgebra *alg);

// Writes the Hilbert-space dimension and the algebra dimension.
//
// # Safety
// `alg` must be a live handle; the output pointers must be writable.
enum UhlmannStatus uhlmann_algebra_dims(const struct UhlmannAlgebra *alg,
                                        size_t *hilbert_dim,
                                        size_t *dim);

// # Safety
// `alg` must be a live handle and `out` writable.
enum UhlmannStatus uhlmann_algebra_commutant(const struct UhlmannAlgebra *alg,
                                             const struct UhlmannTolerances *tol,
                                             struct UhlmannAlgebra **out);

// Whether `x` (`2·n·n` doubles) lies in the algebra; the verdict carries the
// membership residual.
//
// # Safety
// `alg` must be a live handle, `x` readable and `out` writable.
enum UhlmannStatus uhlmann_algebra_contains(const struct UhlmannAlgebra *alg,
                                            const double *x,
                                            const struct UhlmannTolerances *tol,
                                            struct UhlmannVerdict *out);

// `b = a'` for commuting algebras.
//
// # Safety
// `a` and `b` must be live handles and `out` writable.
enum UhlmannStatus uhlmann_check_haag_duality(const struct UhlmannAlgebra *a,
                                              const struct UhlmannAlgebra *b,
                                              const struct UhlmannTolerances *tol,
                                              struct UhlmannVerdict *out);

// `a ∨ b = B(H)` for commuting algebras.
//
// # Safety
// `a` and `b` must be live handles and `out` writable.
enum UhlmannStatus uhlmann_check_local_tomography(const struct UhlmannAlgebra *a,
                                                  const struct UhlmannAlgebra *b,
                                                  const struct UhlmannTolerances *tol,
                                                  struct UhlmannVerdict *out);

// `sup |⟨Ψ, uΦ⟩|` over unitaries `u` in `b`. When `optimizer` is not null it
// receives the maximizing unitary (`2·n·n` doubles).
//
// # Safety
// `b` must be a live handle; `psi` and `phi` must hold `2·n` doubles;
// `value` and a non-null `optimizer` must be writable.
enum UhlmannStatus uhlmann_max_overlap(const struct UhlmannAlgebra *b,
                                       const double *psi,
                                       const double *phi,
                                       const struct UhlmannTolerances *tol,
                                       double *value,
                                       double *optimizer);

// `‖√ρ √σ‖₁` for `dim × dim` density matrices.
//
// # Safety
// `rho` and `sigma` must hold `2·dim·dim` doubles and `out` be writable.
enum UhlmannStatus uhlmann_fidelity(size_t dim,
                                    const double *rho,
                                    const double *sigma,
                                    const struct UhlmannTolerances *tol,
                                    double *out);

// The `1, e, m, em` states on an `l × l` torus with patches `A1`, `A2` at
// least `separation` apart. A negative `radius` picks the largest that fits.
//
// # Safety
// `out` must be writable.
enum UhlmannStatus uhlmann_toric_classes(size_t l,
                                         int64_t radius,
                                         size_t separation,
                                         struct UhlmannToricClasses *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UHLMANN_H */
