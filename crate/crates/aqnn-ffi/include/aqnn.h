#ifndef AQNN_H
#define AQNN_H

/* Generated by cbindgen from the aqnn-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum AqnnStatus {
  AQNN_STATUS_OK = 0,
  AQNN_STATUS_NULL_POINTER = 1,
  AQNN_STATUS_INVALID_ARGUMENT = 2,
  AQNN_STATUS_DIMENSION_MISMATCH = 3,
  AQNN_STATUS_NOT_CPTP = 4,
  AQNN_STATUS_NUMERICAL_FAILURE = 5,
} AqnnStatus;

// CPTP verdict as a C enum.
typedef enum AqnnVerdict {
  AQNN_VERDICT_CPTP = 0,
  AQNN_VERDICT_CP_ONLY = 1,
  AQNN_VERDICT_TP_ONLY = 2,
  AQNN_VERDICT_NEITHER = 3,
} AqnnVerdict;

// Opaque channel handle (a Choi operator together with its dimensions).
typedef struct AqnnChoi AqnnChoi;

// Result of the CPTP verification checks.
typedef struct AqnnCptpReport {
  double min_eigenvalue;
  double tp_deviation;
  double hermiticity_deviation;
  enum AqnnVerdict verdict;
} AqnnCptpReport;

// Monte Carlo volume estimate.
typedef struct AqnnVolumeEstimate {
  double fraction;
  // Binomial standard error sqrt(f(1-f)/samples).
  double std_error;
  uint64_t hits;
  uint64_t samples;
} AqnnVolumeEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string of the library; static storage, do not free.
const char *aqnn_version(void);

// Creates the identity-channel Choi operator on an `n`-dimensional space.
//
// # Safety
// `out` must be a valid pointer to an `AqnnChoi*` slot.
enum AqnnStatus aqnn_choi_identity(uintptr_t n, struct AqnnChoi **out);

// Creates a channel handle from a raw Choi matrix of size
// `(dim_a*dim_b) × (dim_a*dim_b)`, entries interleaved row-major
// (`2*(dim_a*dim_b)²` doubles). The operator is not required to be CPTP;
// use [`aqnn_choi_verify`] to check.
//
// # Safety
// `entries` must point to `2*(dim_a*dim_b)²` readable doubles and `out`
// to a valid `AqnnChoi*` slot.
enum AqnnStatus aqnn_choi_new(uintptr_t dim_a,
                              uintptr_t dim_b,
                              const double *entries,
                              struct AqnnChoi **out);

// Releases a channel handle. Null is ignored.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void aqnn_choi_free(struct AqnnChoi *handle);

// Reads the input/output dimensions of a channel handle.
//
// # Safety
// All pointers must be valid.
enum AqnnStatus aqnn_choi_dims(const struct AqnnChoi *handle, uintptr_t *dim_a, uintptr_t *dim_b);

// Copies the Choi matrix out as interleaved doubles
// (`2*(dim_a*dim_b)²` values).
//
// # Safety
// `out` must point to at least `2*(dim_a*dim_b)²` writable doubles.
enum AqnnStatus aqnn_choi_entries(const struct AqnnChoi *handle, double *out);

// Runs the CPTP checks at tolerance `tol` (pass 0 for the default 1e-9).
//
// # Safety
// `handle` and `report` must be valid pointers.
enum AqnnStatus aqnn_choi_verify(const struct AqnnChoi *handle,
                                 double tol,
                                 struct AqnnCptpReport *report);

// Applies the channel to a density matrix given as `2*dim_a²` interleaved
// doubles, writing `2*dim_b²` interleaved doubles.
//
// # Safety
// `rho` must point to `2*dim_a²` readable doubles and `out` to `2*dim_b²`
// writable doubles.
enum AqnnStatus aqnn_choi_apply(const struct AqnnChoi *handle, const double *rho, double *out);

// Builds the canonical attractor channel from an `n × n` coefficient
// matrix (interleaved, row-major): PSD with unit diagonal, entry `(μ,ν)`
// multiplies the coherence `ρ_{μν}`.
//
// # Safety
// `b_entries` must point to `2n²` readable doubles and `out` to a valid
// `AqnnChoi*` slot.
enum AqnnStatus aqnn_canonical_channel(uintptr_t n, const double *b_entries, struct AqnnChoi **out);

// Draws one channel from the Hilbert–Schmidt-uniform CPTP ensemble on an
// `n`-dimensional space, deterministically from `(master_seed, stream_id)`.
//
// # Safety
// `out` must be a valid pointer to an `AqnnChoi*` slot.
enum AqnnStatus aqnn_sample_cptp(uintptr_t n,
                                 uint64_t master_seed,
                                 uint64_t stream_id,
                                 struct AqnnChoi **out);

// Fixed-point structure of a square channel: number of transfer-matrix
// eigenvalues with `|λ−1| ≤ window` and the peripheral count
// (`|λ| ≥ 1−window`, `λ ≠ 1`).
//
// # Safety
// All pointers must be valid.
enum AqnnStatus aqnn_fixed_point_dims(const struct AqnnChoi *handle,
                                      double window,
                                      uintptr_t *dimension,
                                      uintptr_t *peripheral);

// Applies the channel to the `mu`-th computational basis projector and
// returns the survival overlap `⟨μ|Λ(|μ⟩⟨μ|)|μ⟩` (the Choi diagonal).
//
// # Safety
// `handle` and `overlap` must be valid pointers.
enum AqnnStatus aqnn_pattern_overlap(const struct AqnnChoi *handle, uintptr_t mu, double *overlap);

// Monte Carlo estimate of the fraction of CPTP maps on an `n`-dimensional
// space that hold the first `m` basis states inside the basin window
// `epsilon`. Bit-reproducible from `master_seed` for any thread count.
//
// # Safety
// `out` must be a valid pointer.
enum AqnnStatus aqnn_estimate_relative_volume(uintptr_t n,
                                              uintptr_t m,
                                              double epsilon,
                                              uint64_t samples,
                                              uint64_t master_seed,
                                              struct AqnnVolumeEstimate *out);

// Asymptotic volume of the CPTP body at manifold dimension `d`
// (NaN for invalid input).
double aqnn_v_cptp(double d);

// Analytic relative volume for `k` constraints in a `d`-dimensional body
// at basin width `epsilon` (NaN for invalid input).
double aqnn_relative_volume(double epsilon, double k, double d);

// Stirling approximation of the log relative volume.
double aqnn_log_vr_stirling(double epsilon, double m, double d);

// Basin width maximizing the relative volume subject to `V_R < 1`.
double aqnn_optimal_epsilon(double d);

// Relative volume at the optimal basin width, `exp(−m²/(4d))`.
double aqnn_vr_optimal(double m, double d);

// Purity `Tr[ρ²]` of a density matrix given as interleaved doubles;
// returns NaN for invalid input. Mostly a convenience for bindings tests.
//
// # Safety
// `rho` must point to `2n²` readable doubles.
double aqnn_state_purity(uintptr_t n, const double *rho);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AQNN_H */
