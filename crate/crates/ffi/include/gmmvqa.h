#ifndef GMMVQA_H
#define GMMVQA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GmmStatus {
  GMM_STATUS_OK = 0,
  GMM_STATUS_NULL_POINTER = 1,
  GMM_STATUS_INVALID_ARGUMENT = 2,
  GMM_STATUS_PARSE = 3,
  GMM_STATUS_SHAPE_MISMATCH = 4,
  GMM_STATUS_CAPACITY = 5,
  GMM_STATUS_PRECONDITION = 6,
  GMM_STATUS_IO = 7,
  GMM_STATUS_PANIC = 8,
} GmmStatus;

/**
 * Circuit shape handle.
 */
typedef struct GmmCircuit GmmCircuit;

/**
 * Observable handle.
 */
typedef struct GmmObservable GmmObservable;

/**
 * Initialization strategy handle, tied to the circuit it was built for.
 */
typedef struct GmmStrategy GmmStrategy;

typedef struct GmmMcSummary {
  size_t samples;
  double mean_norm_sq;
  double stderr_norm_sq;
  double mean_cost;
} GmmMcSummary;

typedef struct GmmMoments {
  double alpha;
  double beta;
  double gamma;
} GmmMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *gmm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gmm_version(void);

/**
 * Builds an observable from `n_terms` coefficients and Pauli words such as
 * `"XZIY"`. Repeated words are merged.
 *
 * # Safety
 * `coeffs` and `words` must point to `n_terms` readable elements, each word a
 * valid C string; `out` must be writable.
 */
enum GmmStatus gmm_observable_new(size_t n_qubits,
                                  const double *coeffs,
                                  const char *const *words,
                                  size_t n_terms,
                                  struct GmmObservable **out);

/**
 * Open-chain transverse-field Ising observable on `n_qubits` qubits.
 *
 * # Safety
 * `out` must be writable.
 */
enum GmmStatus gmm_observable_tfim(size_t n_qubits, struct GmmObservable **out);

/**
 * Loads a TOML observable file.
 *
 * # Safety
 * `path` must be a valid C string and `out` writable.
 */
enum GmmStatus gmm_observable_load(const char *path, struct GmmObservable **out);

/**
 * Number of terms, or 0 for NULL.
 *
 * # Safety
 * `obs` must be NULL or a live handle.
 */
size_t gmm_observable_len(const struct GmmObservable *obs);

/**
 * # Safety
 * `obs` must be NULL or a handle not yet freed.
 */
void gmm_observable_free(struct GmmObservable *obs);

/**
 * Circuit of `n_blocks` blocks with entangler preset `"chain"`, `"ring"` or
 * `"none"` and gate order `"RX_RY"`, `"RY_RX"` or `"RX_RY_RX"`.
 *
 * # Safety
 * `preset` and `gate_order` must be valid C strings and `out` writable.
 */
enum GmmStatus gmm_circuit_new(size_t n_qubits,
                               size_t n_blocks,
                               const char *preset,
                               const char *gate_order,
                               struct GmmCircuit **out);

/**
 * Number of rotation angles, or 0 for NULL.
 *
 * # Safety
 * `circuit` must be NULL or a live handle.
 */
size_t gmm_circuit_param_count(const struct GmmCircuit *circuit);

/**
 * # Safety
 * `circuit` must be NULL or a handle not yet freed.
 */
void gmm_circuit_free(struct GmmCircuit *circuit);

/**
 * Builds an initialization strategy. `chosen_term < 0` means none, which
 * only the baselines accept. A negative `sigma2` keeps the default variance.
 *
 * # Safety
 * `kind` must be a valid C string, `circuit` and `obs` live handles, and
 * `out` writable.
 */
enum GmmStatus gmm_strategy_new(const char *kind,
                                const struct GmmCircuit *circuit,
                                const struct GmmObservable *obs,
                                int64_t chosen_term,
                                double sigma2,
                                struct GmmStrategy **out);

/**
 * # Safety
 * `strategy` must be NULL or a handle not yet freed.
 */
void gmm_strategy_free(struct GmmStrategy *strategy);

/**
 * Draws one parameter vector into `out[0..len]`; `len` must equal the
 * circuit's parameter count. Deterministic per seed.
 *
 * # Safety
 * `strategy` must be a live handle and `out` must point to `len` writable
 * doubles.
 */
enum GmmStatus gmm_sample_params(const struct GmmStrategy *strategy,
                                 uint64_t seed,
                                 double *out,
                                 size_t len);

/**
 * `⟨ψ(θ)|O|ψ(θ)⟩`.
 *
 * # Safety
 * `circuit` and `obs` must be live handles, `params` must point to `len`
 * readable doubles and `out` must be writable.
 */
enum GmmStatus gmm_cost(const struct GmmCircuit *circuit,
                        const struct GmmObservable *obs,
                        const double *params,
                        size_t len,
                        double *out);

/**
 * Full gradient into `grad[0..len]` with engine `"adjoint"` or `"shift"`.
 * `norm_sq` may be NULL.
 *
 * # Safety
 * `circuit` and `obs` must be live handles; `params` and `grad` must each
 * point to `len` doubles.
 */
enum GmmStatus gmm_gradient(const struct GmmCircuit *circuit,
                            const struct GmmObservable *obs,
                            const char *engine,
                            const double *params,
                            double *grad,
                            size_t len,
                            double *norm_sq);

/**
 * Monte-Carlo gradient statistics; sample `i` uses seed `seed + i`.
 * `workers = 0` uses all cores.
 *
 * # Safety
 * All handles must be live and `out` writable.
 */
enum GmmStatus gmm_mc_grad_stats(const struct GmmCircuit *circuit,
                                 const struct GmmObservable *obs,
                                 const struct GmmStrategy *strategy,
                                 size_t n_samples,
                                 uint64_t seed,
                                 const char *engine,
                                 size_t workers,
                                 struct GmmMcSummary *out);

/**
 * Gaussian moment coefficients for variance `sigma2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GmmStatus gmm_moment_coeffs(double sigma2, struct GmmMoments *out);

/**
 * Single-term gradient-norm bound for `n_blocks` blocks.
 *
 * # Safety
 * `out` must be writable.
 */
enum GmmStatus gmm_bound_single(size_t n_blocks, double *out);

/**
 * Bound for `m` equivalent terms.
 *
 * # Safety
 * `out` must be writable.
 */
enum GmmStatus gmm_bound_equivalent(size_t m, size_t n_blocks, double *out);

/**
 * Bound including cross terms, for observables with non-negative
 * coefficients.
 *
 * # Safety
 * `obs` must be a live handle and `out` writable.
 */
enum GmmStatus gmm_bound_cross(const struct GmmObservable *obs,
                               size_t chosen_term,
                               size_t n_blocks,
                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GMMVQA_H */
