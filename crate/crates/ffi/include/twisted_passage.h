#ifndef TWISTED_PASSAGE_H
#define TWISTED_PASSAGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_PARAMS = 2,
  TP_STATUS_INVALID_CONFIG = 3,
  TP_STATUS_STEP_UNDERFLOW = 4,
  TP_STATUS_WINDOW_TOO_LARGE = 5,
  TP_STATUS_SINGLE_CROSSING = 6,
  TP_STATUS_NO_INTERIOR_EXTREMUM = 7,
  TP_STATUS_UNSUPPORTED_ORDER = 8,
  TP_STATUS_SWEEP_WINDOW_TOO_NARROW = 9,
  TP_STATUS_ORDERING_VIOLATION = 10,
  /**
   * Output buffer too small; the required length was written back.
   */
  TP_STATUS_BUFFER_TOO_SMALL = 11,
  TP_STATUS_INDEX_OUT_OF_RANGE = 12,
  TP_STATUS_PANIC = 99,
} TpStatus;

typedef enum TpEstimator {
  TP_ESTIMATOR_DRESSED = 0,
  TP_ESTIMATOR_BARE = 1,
} TpEstimator;

/**
 * Opaque pulse description.
 */
typedef struct TpPulse TpPulse;

/**
 * Opaque sampled trajectory.
 */
typedef struct TpTrajectory TpTrajectory;

/**
 * Integrator settings. `tau0 <= 0` picks the window from the pulse;
 * `output_step <= 0` keeps only the endpoints and averaging samples.
 */
typedef struct TpIntegratorConfig {
  double rel_tol;
  double abs_tol;
  double initial_step;
  double max_step;
  double tau0;
  double output_step;
  enum TpEstimator estimator;
} TpIntegratorConfig;

typedef struct TpReport {
  double probability;
  double half_window;
  /**
   * Spread of the averaged samples.
   */
  double oscillation_band;
  uint64_t steps_taken;
  uint64_t rejected_steps;
  double max_norm_drift;
} TpReport;

typedef struct TpSample {
  double tau;
  double re_s;
  double im_s;
  double re_i;
  double im_i;
  double p;
} TpSample;

typedef struct TpOptimum {
  double eta_star;
  double p_star;
  double fidelity;
  bool fault_tolerant;
  double bracket_lo;
  double bracket_hi;
  size_t evaluations;
  size_t failed_evaluations;
} TpOptimum;

typedef struct TpExperimentParams {
  /**
   * Sweep amplitude `A`.
   */
  double sweep_amplitude;
  /**
   * Twist strength `B_exp`.
   */
  double twist_strength;
  double omega1;
  /**
   * Pulse duration `T`.
   */
  double duration;
  uint32_t n;
} TpExperimentParams;

typedef struct TpCnotLevels {
  double e00;
  double e01;
  double e10;
  double e11;
  double omega_plus;
  double omega_minus;
} TpCnotLevels;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *tp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tp_version(void);

enum TpStatus tp_integrator_config_default(struct TpIntegratorConfig *out_config);

/**
 * Create a pulse. Release with [`tp_pulse_free`].
 */
enum TpStatus tp_pulse_new(double lambda, double eta, uint32_t n, struct TpPulse **out_pulse);

void tp_pulse_free(struct TpPulse *pulse);

/**
 * Asymptotic transition probability with diagnostics. `config` may be null.
 */
enum TpStatus tp_asymptotic_report(const struct TpPulse *pulse,
                                   const struct TpIntegratorConfig *config,
                                   struct TpReport *out_report);

/**
 * Same quantity from the independent lab-frame spinor integration.
 */
enum TpStatus tp_lab_frame_report(const struct TpPulse *pulse,
                                  const struct TpIntegratorConfig *config,
                                  struct TpReport *out_report);

/**
 * Integrate and keep the sampled trajectory. Release with [`tp_trajectory_free`].
 */
enum TpStatus tp_integrate(const struct TpPulse *pulse,
                           const struct TpIntegratorConfig *config,
                           struct TpTrajectory **out_trajectory);

/**
 * Number of samples; 0 for a null handle.
 */
size_t tp_trajectory_len(const struct TpTrajectory *trajectory);

double tp_trajectory_max_norm_drift(const struct TpTrajectory *trajectory);

enum TpStatus tp_trajectory_sample(const struct TpTrajectory *trajectory,
                                   size_t index,
                                   struct TpSample *out_sample);

void tp_trajectory_free(struct TpTrajectory *trajectory);

/**
 * Predicted avoided-crossing times in ascending order. `*inout_len` holds the
 * buffer capacity on entry and the number of crossings on return; when the
 * buffer is too small nothing is copied and `TP_STATUS_BUFFER_TOO_SMALL` is
 * returned. `out_crossings` may be null when the capacity is 0.
 */
enum TpStatus tp_crossings(const struct TpPulse *pulse, double *out_crossings, size_t *inout_len);

enum TpStatus tp_landau_zener(double lambda, double *out_probability);

/**
 * Exact transition probability for quadratic twist.
 */
enum TpStatus tp_quadratic_exact(double lambda, double eta2, double *out_probability);

/**
 * Twist strength in `[lo, hi]` minimising the transition probability.
 */
enum TpStatus tp_find_quench(double lambda,
                             uint32_t n,
                             double lo,
                             double hi,
                             double tol_eta,
                             const struct TpIntegratorConfig *config,
                             struct TpOptimum *out_optimum);

/**
 * Twist strength in `[lo, hi]` maximising the transition probability.
 */
enum TpStatus tp_find_pump(double lambda,
                           uint32_t n,
                           double lo,
                           double hi,
                           double tol_eta,
                           const struct TpIntegratorConfig *config,
                           struct TpOptimum *out_optimum);

/**
 * Spectrometer parameters for `pulse` at Rabi frequency `omega1` and sweep ratio `f`.
 */
enum TpStatus tp_to_experiment(const struct TpPulse *pulse,
                               double omega1,
                               double f,
                               struct TpExperimentParams *out_params);

/**
 * Dimensionless pulse for spectrometer parameters. Release with [`tp_pulse_free`].
 */
enum TpStatus tp_from_experiment(const struct TpExperimentParams *params,
                                 struct TpPulse **out_pulse);

/**
 * Reads back the parameters of a pulse handle.
 */
enum TpStatus tp_pulse_params(const struct TpPulse *pulse,
                              double *out_lambda,
                              double *out_eta,
                              uint32_t *out_n);

/**
 * Two-qubit levels for a CNOT built from a single rapid passage.
 */
enum TpStatus tp_cnot_levels(double omega_c,
                             double omega_t,
                             double j,
                             struct TpCnotLevels *out_levels);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTED_PASSAGE_H */
