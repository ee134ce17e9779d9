#ifndef TRAPDECO_H
#define TRAPDECO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdPotentialKind {
  /**
   * `p1` = axial angular frequency ω₀ (rad/s).
   */
  TD_POTENTIAL_KIND_HARMONIC = 0,
  /**
   * `V = p1·x² + p2·x⁴` (J/m², J/m⁴).
   */
  TD_POTENTIAL_KIND_QUAD_QUARTIC = 1,
  /**
   * `p1` = ion spacing (m).
   */
  TD_POTENTIAL_KIND_EQUISPACED_LOG = 2,
} TdPotentialKind;

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  /**
   * Invalid argument or configuration.
   */
  TD_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Argument outside the model's domain of validity.
   */
  TD_STATUS_DOMAIN = 2,
  /**
   * A numerical procedure failed (no convergence, unstable chain).
   */
  TD_STATUS_NUMERICAL = 3,
  TD_STATUS_NULL_POINTER = 4,
  /**
   * Output buffer shorter than required.
   */
  TD_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Internal error; please report.
   */
  TD_STATUS_PANIC = 6,
} TdStatus;

/**
 * Equilibrium chain with its normal modes.
 */
typedef struct TdChain TdChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *td_version(void);

/**
 * Message for the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *td_last_error(void);

/**
 * Solve for the equilibrium of `n_ions` ions of `species_label` (e.g.
 * `"171Yb+"`) and compute the axial modes. On success `*out` owns a new
 * handle.
 *
 * # Safety
 * `species_label` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TdStatus td_chain_new(const char *species_label,
                           enum TdPotentialKind kind,
                           double p1,
                           double p2,
                           size_t n_ions,
                           struct TdChain **out);

/**
 * Release a handle from [`td_chain_new`]. Null is ignored.
 *
 * # Safety
 * `chain` must come from [`td_chain_new`] and not be used afterwards.
 */
void td_chain_free(struct TdChain *chain);

/**
 * Number of ions, or 0 for a null handle.
 *
 * # Safety
 * `chain` must be null or a live handle.
 */
size_t td_chain_n_ions(const struct TdChain *chain);

/**
 * Equilibrium positions in m, `n_ions` values.
 *
 * # Safety
 * `chain` must be a live handle and `out` point to `len` writable doubles.
 */
enum TdStatus td_chain_positions(const struct TdChain *chain, double *out, size_t len);

/**
 * Mode angular frequencies in rad/s, ascending, `n_ions` values.
 *
 * # Safety
 * `chain` must be a live handle and `out` point to `len` writable doubles.
 */
enum TdStatus td_chain_mode_frequencies(const struct TdChain *chain, double *out, size_t len);

/**
 * Participation matrix `b_im`, row-major with ions as rows:
 * `out[i * n_ions + m]`.
 *
 * # Safety
 * `chain` must be a live handle and `out` point to `len` writable doubles.
 */
enum TdStatus td_chain_participation(const struct TdChain *chain, double *out, size_t len);

/**
 * Zero-point spread `sqrt(ħ/(2Mω))` in m.
 *
 * # Safety
 * `species_label` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TdStatus td_zero_point_spread(const char *species_label, double omega, double *out);

/**
 * Thermally averaged Rabi trace at `n_times` times (s) for per-mode decay
 * parameters `thetas`. Each output array receives `n_times` values; any of
 * them may be null to skip it.
 *
 * # Safety
 * Input pointers must reference the stated number of doubles; non-null
 * outputs must hold `n_times` doubles.
 */
enum TdStatus td_rabi_trace(double omega0,
                            const double *thetas,
                            size_t n_thetas,
                            const double *times,
                            size_t n_times,
                            double *p1_out,
                            double *contrast_out,
                            double *phase_out);

/**
 * Two-qubit gate fidelity bound for `gate_count` gates with per-mode decay
 * parameters of both ions.
 *
 * # Safety
 * `theta_i` and `theta_j` must reference `n_modes` doubles; `out` must be
 * valid.
 */
enum TdStatus td_gate_fidelity_bound(const double *theta_i,
                                     const double *theta_j,
                                     size_t n_modes,
                                     uint32_t gate_count,
                                     double *out);

/**
 * Crosstalk excitation rate per qubit (1/s) from coolant fluorescence. SI
 * units; linewidth and isotope shift in rad/s.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TdStatus td_crosstalk_rate(double coolant_fraction,
                                double spacing,
                                double wavelength,
                                double linewidth,
                                double isotope_shift,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAPDECO_H */
