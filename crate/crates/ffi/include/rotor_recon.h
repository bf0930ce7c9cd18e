#ifndef ROTOR_RECON_H
#define ROTOR_RECON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RrStatus {
  RR_STATUS_OK = 0,
  RR_STATUS_NULL_POINTER = 1,
  RR_STATUS_INVALID_ARGUMENT = 2,
  RR_STATUS_DIMENSION_MISMATCH = 3,
  RR_STATUS_NOT_CONVERGED = 4,
  RR_STATUS_DEGENERATE_GROUND_STATE = 5,
  RR_STATUS_IO = 6,
  RR_STATUS_NUMERICAL = 7,
  RR_STATUS_PANIC = 99,
} RrStatus;

/**
 * Exact ground state with its first excitation.
 */
typedef struct RrGroundState RrGroundState;

/**
 * Chain Hamiltonian.
 */
typedef struct RrHamiltonian RrHamiltonian;

/**
 * RBM parameters.
 */
typedef struct RrRbm RrRbm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes. Returns the full message length without the
 * terminator, so a return value `>= len` means truncation.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rr_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rr_version(void);

/**
 * `D = (ℓ_max+1)²`.
 */
size_t rr_local_dim(uint32_t ell_max);

/**
 * Builds the Hamiltonian of `n_sites` rotors at separation `r`. Pass
 * `INFINITY` for the decoupled chain.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum RrStatus rr_hamiltonian_new(size_t n_sites,
                                 uint32_t ell_max,
                                 double r,
                                 struct RrHamiltonian **out);

/**
 * # Safety
 * `h` must be null or a handle from [`rr_hamiltonian_new`] not yet freed.
 */
void rr_hamiltonian_free(struct RrHamiltonian *h);

/**
 * Hilbert-space dimension, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t rr_hamiltonian_dim(const struct RrHamiltonian *h);

/**
 * `y = H x`, both of length `len` (the dimension).
 *
 * # Safety
 * `x` and `y` must point to `len` doubles and must not overlap.
 */
enum RrStatus rr_hamiltonian_apply(const struct RrHamiltonian *h,
                                   const double *x,
                                   double *y,
                                   size_t len);

/**
 * Lowest two eigenvalues and the ground state.
 *
 * # Safety
 * `h` must be a live handle and `out` a valid handle slot.
 */
enum RrStatus rr_ground_state(const struct RrHamiltonian *h,
                              double tol,
                              size_t max_iter,
                              struct RrGroundState **out);

/**
 * # Safety
 * `gs` must be null or a live handle.
 */
void rr_ground_state_free(struct RrGroundState *gs);

/**
 * Writes `E₀`, `E₁` and the gap; any output pointer may be null.
 *
 * # Safety
 * `gs` must be a live handle; non-null outputs must be writable.
 */
enum RrStatus rr_ground_state_energies(const struct RrGroundState *gs,
                                       double *energy_0,
                                       double *energy_1,
                                       double *gap);

/**
 * Weight of the all-zero configuration over the weight of all others,
 * `|ψ(0)|² / Σ_{i≠0} |ψ(i)|²`.
 *
 * # Safety
 * `gs` must be a live handle and `out` writable.
 */
enum RrStatus rr_ground_state_amplitude_ratio(const struct RrGroundState *gs, double *out);

/**
 * Copies the normalized ground-state amplitudes into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum RrStatus rr_ground_state_amplitudes(const struct RrGroundState *gs, double *buf, size_t len);

/**
 * Draws `count` measurements from `|ψ|²` into `labels`, row-major
 * `[count][n_sites]` flattened labels.
 *
 * # Safety
 * Handles must be live; `labels` must point to `len` writable `u32`s.
 */
enum RrStatus rr_sample_exact(const struct RrHamiltonian *h,
                              const struct RrGroundState *gs,
                              size_t count,
                              uint64_t seed,
                              uint32_t *labels,
                              size_t len);

/**
 * Fresh RBM with `W ~ N(0, 0.01²)` and zero biases.
 *
 * # Safety
 * `out` must be a valid handle slot.
 */
enum RrStatus rr_rbm_new(size_t n_sites,
                         uint32_t ell_max,
                         size_t n_hidden,
                         uint64_t seed,
                         struct RrRbm **out);

/**
 * Loads a checkpoint file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum RrStatus rr_rbm_load(const char *path, struct RrRbm **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum RrStatus rr_rbm_save(const struct RrRbm *model, const char *path);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
void rr_rbm_free(struct RrRbm *model);

/**
 * Writes `n_sites`, `ell_max` and `n_hidden`; any output may be null.
 *
 * # Safety
 * `model` must be a live handle; non-null outputs must be writable.
 */
enum RrStatus rr_rbm_shape(const struct RrRbm *model,
                           size_t *n_sites,
                           uint32_t *ell_max,
                           size_t *n_hidden);

/**
 * `ℰ(σ)` for one configuration of `len = n_sites` labels.
 *
 * # Safety
 * `labels` must point to `len` values and `out` must be writable.
 */
enum RrStatus rr_rbm_effective_energy(const struct RrRbm *model,
                                      const uint32_t *labels,
                                      size_t len,
                                      double *out);

/**
 * `count` independent `k`-step Gibbs chains from the all-zero
 * configuration; final visible labels go to `labels` as `[count][n_sites]`.
 *
 * # Safety
 * `labels` must point to `len` writable `u32`s.
 */
enum RrStatus rr_rbm_gibbs_sample(const struct RrRbm *model,
                                  size_t k,
                                  size_t count,
                                  uint64_t seed,
                                  uint32_t *labels,
                                  size_t len);

/**
 * Monte Carlo `E_RBM` over `count` configurations given as `[count][n_sites]`
 * labels; writes the total energy and its standard error.
 *
 * # Safety
 * Handles must be live; `labels` must point to `len` values.
 */
enum RrStatus rr_rbm_energy(const struct RrRbm *model,
                            const struct RrHamiltonian *h,
                            const uint32_t *labels,
                            size_t len,
                            double *energy,
                            double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTOR_RECON_H */
