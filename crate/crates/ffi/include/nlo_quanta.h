#ifndef NLO_QUANTA_H
#define NLO_QUANTA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NqStatus {
  NQ_STATUS_OK = 0,
  NQ_STATUS_NULL_POINTER = 1,
  NQ_STATUS_INVALID_ARGUMENT = 2,
  NQ_STATUS_TRUNCATION = 3,
  NQ_STATUS_DOMAIN = 4,
  NQ_STATUS_NUMERIC = 5,
  NQ_STATUS_AMBIGUOUS = 6,
  NQ_STATUS_BUFFER_TOO_SMALL = 7,
  NQ_STATUS_PANIC = 8,
} NqStatus;

// Hamiltonian model with its conserved charges.
typedef struct NqModel NqModel;

// Truncated Fock space.
typedef struct NqSpace NqSpace;

// Pure or mixed state on an `NqSpace`.
typedef struct NqState NqState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated) and stores the message length, excluding the terminator, in
// `len`. Returns `BufferTooSmall` if `buf_len` cannot hold it.
//
// # Safety
// `buf` must be valid for `buf_len` bytes or null with `buf_len == 0`;
// `len` must be valid or null.
enum NqStatus nq_last_error(char *buf, uintptr_t buf_len, uintptr_t *len);

// # Safety
// `dims` must point to `n_modes` values; `out` must be valid.
enum NqStatus nq_space_new(const uintptr_t *dims, uintptr_t n_modes, struct NqSpace **out);

// # Safety
// `space` must come from `nq_space_new` and not be freed twice.
void nq_space_free(struct NqSpace *space);

// Total Hilbert-space dimension.
//
// # Safety
// `space` must be a live handle.
enum NqStatus nq_space_dim(const struct NqSpace *space, uintptr_t *out);

// Product coherent state with amplitudes `re[i] + i·im[i]`, one per mode.
//
// # Safety
// `re` and `im` must point to `n` values; handles must be live.
enum NqStatus nq_state_coherent(const struct NqSpace *space,
                                const double *re,
                                const double *im,
                                uintptr_t n,
                                struct NqState **out);

// # Safety
// `occupation` must point to `n` values; handles must be live.
enum NqStatus nq_state_fock(const struct NqSpace *space,
                            const uintptr_t *occupation,
                            uintptr_t n,
                            struct NqState **out);

// # Safety
// `state` must come from this library and not be freed twice.
void nq_state_free(struct NqState *state);

// `⟨n̂⟩` of `mode`.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_state_mean_number(const struct NqState *state, uintptr_t mode, double *out);

// `Var(n̂) - ⟨n̂⟩` of `mode`; negative means sub-Poissonian.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_state_mandel_excess(const struct NqState *state, uintptr_t mode, double *out);

// `Var X(φ)`, vacuum value 1/4.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_state_quadrature_variance(const struct NqState *state,
                                           uintptr_t mode,
                                           double phi,
                                           double *out);

// `[Δ(x_a + x_b)]² + [Δ(p_a - p_b)]²`; below 2 means entangled.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_state_duan_simon_sum(const struct NqState *state,
                                      uintptr_t mode_a,
                                      uintptr_t mode_b,
                                      double *out);

// Single-mode Kerr Hamiltonian `ωa†a + κa†²a²`.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_model_kerr(const struct NqSpace *space,
                            double omega,
                            double kappa,
                            struct NqModel **out);

// Degenerate two-mode χ⁽²⁾ Hamiltonian; mode 0 is the signal, mode 1 the pump.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_model_two_mode_chi2(const struct NqSpace *space,
                                     double omega,
                                     double kappa,
                                     struct NqModel **out);

// # Safety
// `model` must come from this library and not be freed twice.
void nq_model_free(struct NqModel *model);

// Evolves `state` under `model` for time `t`; the result is a new handle.
//
// # Safety
// Handles and `out` must be valid.
enum NqStatus nq_evolve(const struct NqModel *model,
                        const struct NqState *state,
                        double t,
                        struct NqState **out);

// Optimum of the pump-noise-limited squeezing for `np` pump photons.
//
// # Safety
// Output pointers must be valid.
enum NqStatus nq_max_squeezing(double np, double *u_star, double *var_min);

// Closed-form optimum of the Kerr beam-splitter scheme. Returns `Domain`
// (with the values still written) when `|α|φ` is outside the range where
// the expansion holds.
//
// # Safety
// Output pointers must be valid.
enum NqStatus nq_kerr_bs_optimum(double alpha,
                                 double phi,
                                 double *excess,
                                 double *r_opt,
                                 double *eta_opt);

// Linearized `(ΔX₂)²` of the oscillator signal below threshold.
//
// # Safety
// `out` must be valid.
enum NqStatus nq_dpo_squeezing(double kappa,
                               double e0,
                               double gamma_a,
                               double gamma_b,
                               double *out);

// Pair-correlation kernel at separation `delta_z`.
//
// # Safety
// Output pointers must be valid.
enum NqStatus nq_downconv_kernel(double delta_z, double k0, double *re, double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLO_QUANTA_H */
