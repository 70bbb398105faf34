#ifndef CASCADED_RELAY_H
#define CASCADED_RELAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Relay selection protocol.
typedef enum CrScheme {
  CR_SCHEME_SELECTIVE_DECODE_FORWARD = 0,
  CR_SCHEME_SELECTIVE_AMPLIFY_FORWARD = 1,
} CrScheme;

// Result code of every fallible call.
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_POINTER = 1,
  CR_STATUS_INVALID_ARGUMENT = 2,
  CR_STATUS_ORDER_OUT_OF_RANGE = 3,
  CR_STATUS_NOT_IID = 4,
  CR_STATUS_NUMERICAL = 5,
  CR_STATUS_PANIC = 6,
} CrStatus;

// Opaque cascade-order classifier.
typedef struct CrClassifier CrClassifier;

// Opaque relay network.
typedef struct CrNetwork CrNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *cr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cr_version(void);

// Shape `m` and spread `Ω` of the cascade-order-`n` fading approximation.
//
// # Safety
// `m` and `omega` must be valid for writes.
enum CrStatus cr_fading_params(uint32_t n, double *m, double *omega);

// Creates a network of `relays` identical relays with cascade order `n` on
// both hops, mean channel gains `lambda1`, `lambda2`, threshold `gamma_o`,
// unit noise power and unit total power.
//
// # Safety
// `out` must be valid for writes. The handle must be released with [`cr_network_free`].
enum CrStatus cr_network_new_uniform(uint32_t n,
                                     size_t relays,
                                     double lambda1,
                                     double lambda2,
                                     double gamma_o,
                                     struct CrNetwork **out);

// Releases a network handle. Null is ignored.
//
// # Safety
// `net` must be null or a handle from [`cr_network_new_uniform`] not yet freed.
void cr_network_free(struct CrNetwork *net);

// Sets the total power budget `P_T` used by the power-allocation calls.
//
// # Safety
// `net` must be a live handle.
enum CrStatus cr_network_set_total_power(struct CrNetwork *net, double total_power);

// Number of relays in the network.
//
// # Safety
// `net` must be a live handle and `out` valid for writes.
enum CrStatus cr_network_relays(const struct CrNetwork *net, size_t *out);

// Analytic outage with both hops at per-hop SNR `snr` (P/N₀, linear).
//
// # Safety
// `net` must be a live handle and `out` valid for writes.
enum CrStatus cr_outage(const struct CrNetwork *net, enum CrScheme scheme, double snr, double *out);

// S-DF outage when the relay of rank `rank` (1 = worst, N = best) forwards.
//
// # Safety
// `net` must be a live handle and `out` valid for writes.
enum CrStatus cr_outage_sdf_rank(const struct CrNetwork *net, double snr, size_t rank, double *out);

// High-SNR asymptote of the outage (i.i.d. networks only).
//
// # Safety
// `net` must be a live handle and `out` valid for writes.
enum CrStatus cr_outage_asymptotic(const struct CrNetwork *net, double snr, double *out);

// Diversity order `mN/n` of the network's first source hop.
//
// # Safety
// `net` must be a live handle and `out` valid for writes.
enum CrStatus cr_diversity_order(const struct CrNetwork *net, double *out);

// Seeded Monte-Carlo outage over the exact cascaded channel.
//
// # Safety
// `net` must be a live handle; `value` and `std_error` must be valid for writes.
enum CrStatus cr_outage_monte_carlo(const struct CrNetwork *net,
                                    enum CrScheme scheme,
                                    double snr,
                                    uint64_t trials,
                                    uint64_t seed,
                                    double *value,
                                    double *std_error);

// Power split `ρ = P₁/P_T` from the fixed-point iteration, and the outage there.
//
// # Safety
// `net` must be a live handle; `rho` and `outage` must be valid for writes.
enum CrStatus cr_power_split_fixed_point(const struct CrNetwork *net, double *rho, double *outage);

// Power split minimizing the outage by direct search, and the outage there.
//
// # Safety
// `net` must be a live handle; `rho` and `outage` must be valid for writes.
enum CrStatus cr_power_split_oracle(const struct CrNetwork *net, double *rho, double *outage);

// Creates a classifier over cascade orders `orders[0..len]` with default
// variances `2^{−n}`. `priors` may be null for uniform priors; otherwise it
// holds `len` nonnegative weights, normalized internally.
//
// # Safety
// `orders` (and `priors` when non-null) must point to `len` readable values;
// `out` must be valid for writes. Release with [`cr_classifier_free`].
enum CrStatus cr_classifier_new(const uint32_t *orders,
                                const double *priors,
                                size_t len,
                                struct CrClassifier **out);

// Releases a classifier handle. Null is ignored.
//
// # Safety
// `c` must be null or a handle from [`cr_classifier_new`] not yet freed.
void cr_classifier_free(struct CrClassifier *c);

// MAP cascade order for amplitudes `samples[0..len]`.
//
// # Safety
// `c` must be a live handle, `samples` must point to `len` readable values
// and `label` must be valid for writes.
enum CrStatus cr_classify(const struct CrClassifier *c,
                          const double *samples,
                          size_t len,
                          uint32_t *label);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CASCADED_RELAY_H */
