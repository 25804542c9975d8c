#ifndef PHOTONSHAPE_H
#define PHOTONSHAPE_H

/* C interface of the photonshape toolkit.
 *
 * Objects are opaque handles created by ps_*_create / ps_*_from_* / ps_*_run
 * functions and released with the matching ps_*_free (NULL is accepted).
 * Every fallible call returns ps_status; on failure the message is available
 * from ps_last_error() on the calling thread until the next failing call.
 *
 * Units: rates and Rabi frequencies in MHz (value/2π), times in µs, mode
 * amplitudes in µs^-1/2, pulse samples in rad/µs.
 *
 * Array outputs are written to caller buffers of the stated capacity; a
 * capacity smaller than the required length returns PS_ERR_BUFFER_TOO_SMALL.
 * Passing NULL for an optional output skips it. */

#include <stddef.h>
#include <stdint.h>

#if defined(PHOTONSHAPE_BUILDING_LIBRARY)
#define PS_API __attribute__((visibility("default")))
#else
#define PS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1,
  PS_ERR_CONFIGURATION = 2,
  PS_ERR_DEGENERATE_DENOMINATOR = 3,
  PS_ERR_NOT_NORMALIZED = 4,
  PS_ERR_WINDOW_TOO_SMALL = 5,
  PS_ERR_GRID_MISMATCH = 6,
  PS_ERR_INTEGRATOR_FAILURE = 7,
  PS_ERR_MULTIMODE_SIGNAL = 8,
  PS_ERR_FIT_FAILURE = 9,
  PS_ERR_IO = 10,
  PS_ERR_NULL_POINTER = 11,
  PS_ERR_BUFFER_TOO_SMALL = 12,
  PS_ERR_INTERNAL = 13
} ps_status;

PS_API const char* ps_version(void);
PS_API const char* ps_status_name(ps_status status);
PS_API const char* ps_last_error(void);

/* ---- cavity QED model ---------------------------------------------------- */

typedef struct ps_params {
  double g_mhz;
  double kappa_c_mhz;
  double kappa_l_mhz;
  double gamma_mhz;
} ps_params;

typedef enum ps_variant { PS_ONE_LEVEL = 0, PS_TWO_LEVEL = 1, PS_THREE_LEVEL = 2 } ps_variant;
typedef enum ps_coupling { PS_COUPLING_CLEBSCH_GORDAN = 0, PS_COUPLING_UNIT = 1 } ps_coupling;

typedef struct ps_scheme ps_scheme;

/* reference_path NULL selects the bundled ⁸⁷Rb D2 data. */
PS_API ps_status ps_scheme_create(const ps_params* params, double delta_mhz, ps_variant variant,
                                  ps_coupling coupling, const char* reference_path, ps_scheme** out);
PS_API void ps_scheme_free(ps_scheme* scheme);

typedef struct ps_coeffs {
  double a_re[3];
  double a_im[3];
  double b;
  double K_re;
  double K_im;
  double L_re;
  double L_im;
  double calibration;
  double chirp_factor; /* Im K / (2 Re K) */
} ps_coeffs;

PS_API ps_status ps_scheme_coeffs(const ps_scheme* scheme, ps_coeffs* out);
PS_API ps_status ps_scheme_efficiency(const ps_scheme* scheme, double* eta, int* exceeds_unity);
PS_API ps_status ps_scheme_cooperativity(const ps_scheme* scheme, double* cooperativity,
                                         double* escape_efficiency);
PS_API ps_status ps_scheme_large_detuning_limit(const ps_scheme* scheme, double* re_k_delta2,
                                                double* abs_l2_delta2, double* eta_limit);

/* n points on [delta_min, delta_max]. ok[i] = 0 marks a degenerate point. */
PS_API ps_status ps_efficiency_sweep(const ps_params* params, ps_variant variant, ps_coupling coupling,
                                     const char* reference_path, double delta_min_mhz,
                                     double delta_max_mhz, size_t n, int threads, double* delta_mhz,
                                     double* eta, int* ok);
PS_API ps_status ps_efficiency_minimum(const ps_params* params, ps_variant variant, ps_coupling coupling,
                                       const char* reference_path, double delta_min_mhz,
                                       double delta_max_mhz, double* delta_mhz, double* eta);

/* ---- temporal modes ------------------------------------------------------ */

typedef enum ps_shape_family { PS_SHAPE_SECH = 0, PS_SHAPE_GAUSSIAN = 1, PS_SHAPE_SQUARE = 2 } ps_shape_family;

typedef struct ps_shape_spec {
  ps_shape_family family;
  double characteristic_us;
  double t_min_us;
  double t_max_us;
  size_t n_samples;
  int has_phase_jump;
  double jump_time_us;
  double jump_phase_rad;
} ps_shape_spec;

PS_API void ps_shape_spec_default(ps_shape_spec* spec);
PS_API ps_status ps_shape_window_fraction(const ps_shape_spec* spec, double* fraction);

typedef struct ps_mode ps_mode;

PS_API ps_status ps_mode_from_shape(const ps_shape_spec* spec, ps_mode** out);
/* normalize = 0 requires unit norm within 1e-9. im may be NULL. */
PS_API ps_status ps_mode_from_samples(double t0_us, double dt_us, size_t n, const double* re,
                                      const double* im, int normalize, ps_mode** out);
PS_API ps_status ps_mode_read_csv(const char* path, ps_mode** out);
PS_API ps_status ps_mode_write_csv(const ps_mode* mode, const char* path);
PS_API void ps_mode_free(ps_mode* mode);
PS_API ps_status ps_mode_grid(const ps_mode* mode, double* t0_us, double* dt_us, size_t* n);
PS_API ps_status ps_mode_samples(const ps_mode* mode, double* re, double* im, size_t capacity);
PS_API ps_status ps_mode_fidelity(const ps_mode* a, const ps_mode* b, double* fidelity);
PS_API ps_status ps_mode_time_reverse(const ps_mode* mode, ps_mode** out);
PS_API ps_status ps_mode_resample(const ps_mode* mode, double t0_us, double dt_us, size_t n, ps_mode** out);
/* Multiplies by exp(i·alpha·ln R), R the reference's remaining energy. */
PS_API ps_status ps_mode_apply_log_phase(const ps_mode* mode, const ps_mode* reference, double alpha,
                                         ps_mode** out);

/* ---- control pulses ------------------------------------------------------ */

typedef enum ps_direction { PS_EMISSION = 0, PS_STORAGE = 1 } ps_direction;

typedef struct ps_pulse_options {
  int compensate_phase;
  double omega_max_mhz;
  double tail_epsilon;
} ps_pulse_options;

PS_API void ps_pulse_options_default(ps_pulse_options* opts);

typedef struct ps_pulse ps_pulse;

typedef struct ps_pulse_info {
  ps_direction direction;
  double t0_us;
  double dt_us;
  size_t n;
  int compensation;
  double omega_max_mhz;
  double tail_epsilon;
  double peak_rabi_mhz;
  int clamped;         /* nonzero when any sample hit omega_max */
  size_t clamp_onset;  /* valid when clamped */
  size_t clamped_samples;
  size_t active_begin;
  size_t active_end;
  double total_h; /* ∫|Ω|² dt, rad²/µs */
} ps_pulse_info;

PS_API ps_status ps_pulse_synthesize(const ps_mode* target, const ps_scheme* scheme, ps_direction direction,
                                     const ps_pulse_options* opts, ps_pulse** out);
PS_API ps_status ps_pulse_read_csv(const char* path, ps_pulse** out);
PS_API ps_status ps_pulse_write_csv(const ps_pulse* pulse, const char* path);
PS_API void ps_pulse_free(ps_pulse* pulse);
PS_API ps_status ps_pulse_get_info(const ps_pulse* pulse, ps_pulse_info* info);
PS_API ps_status ps_pulse_samples(const ps_pulse* pulse, double* omega_re, double* omega_im, double* h,
                                  size_t capacity);
PS_API ps_status ps_pulse_conjugate_time_reverse(const ps_pulse* pulse, ps_pulse** out);

/* Analytic emission from S = 1: spin-wave amplitude and out-field amplitude. */
PS_API ps_status ps_spin_wave(const ps_pulse* pulse, const ps_scheme* scheme, double* s_re, double* s_im,
                              double* flux_re, double* flux_im, size_t capacity, double* emitted);
/* Analytic storage of an input photon on the pulse grid; stored = |S_end|². */
PS_API ps_status ps_absorb(const ps_pulse* pulse, const ps_mode* input, const ps_scheme* scheme, double* s_re,
                           double* s_im, size_t capacity, double* stored);

/* ---- master-equation simulation ------------------------------------------ */

typedef enum ps_integrator { PS_RK4 = 0, PS_ADAPTIVE = 1 } ps_integrator;

typedef struct ps_sim_options {
  ps_integrator integrator;
  double step_bound;
  double tail_us;
  double rtol;
  double atol;
} ps_sim_options;

PS_API void ps_sim_options_default(ps_sim_options* opts);

typedef struct ps_emission ps_emission;

typedef struct ps_emission_summary {
  int signal_mode; /* 0 = σ+, 1 = σ- */
  double efficiency;
  double wrong_polarization;
  double coherent_efficiency;
  double analytic_efficiency; /* NaN when the analytic model is degenerate */
  double incoherent_fraction;
  double wrong_polarization_fraction;
  double out_coupled[2];
  double lost[2];
  int has_target;
  double mode_fidelity;
  double intensity_fidelity;
  double arrival_delay_us;
  double aligned_mode_fidelity;
  double max_trace_drift;
  size_t steps;
  double step_us;
  size_t n_times;
} ps_emission_summary;

/* Synthesizes the emission pulse for target and simulates it. */
PS_API ps_status ps_emission_run(const ps_scheme* scheme, const ps_mode* target,
                                 const ps_pulse_options* pulse_opts, const ps_sim_options* sim_opts,
                                 ps_emission** out);
PS_API ps_status ps_emission_run_pulse(const ps_scheme* scheme, const ps_pulse* pulse,
                                       const ps_sim_options* sim_opts, ps_emission** out);
PS_API void ps_emission_free(ps_emission* em);
PS_API ps_status ps_emission_get_summary(const ps_emission* em, ps_emission_summary* out);
/* Columns of the per-time table: "t", "trace", "flux_sigma_plus",
 * "flux_sigma_minus", "out_sigma_plus", "out_sigma_minus", "lost_sigma_plus",
 * "lost_sigma_minus", "coherent_re", "coherent_im". */
PS_API ps_status ps_emission_series(const ps_emission* em, const char* column, double* out, size_t capacity);
/* Fails with PS_ERR_INVALID_ARGUMENT when no coherent light was emitted. */
PS_API ps_status ps_emission_coherent_mode(const ps_emission* em, ps_mode** out);
PS_API ps_status ps_emission_write_csv(const ps_emission* em, const char* path);
PS_API ps_status ps_emission_write_json(const ps_emission* em, const char* path);

/* ---- homodyne tomography ------------------------------------------------- */

typedef struct ps_record_grid {
  double t_start_us;
  double bin_width_us;
  size_t n_bins;
} ps_record_grid;

typedef enum ps_generator { PS_GENERATOR_GAUSSIAN = 0, PS_GENERATOR_FOCK_MIXTURE = 1 } ps_generator;

typedef struct ps_records ps_records;

PS_API ps_status ps_records_synthesize(const ps_mode* mode, double p1, size_t trials, const ps_record_grid* grid,
                                       uint64_t seed, ps_generator generator, int threads, ps_records** out);
PS_API ps_status ps_records_read_csv(const char* path, ps_records** out);
PS_API ps_status ps_records_write_csv(const ps_records* records, const char* path);
PS_API void ps_records_free(ps_records* records);
PS_API ps_status ps_records_info(const ps_records* records, ps_record_grid* grid, size_t* trials);

typedef struct ps_decomposition ps_decomposition;

/* vacuum NULL uses the identity (shot-noise-normalized records). */
PS_API ps_status ps_decompose(const ps_records* signal, const ps_records* vacuum, int subtract_mean,
                              ps_decomposition** out);
PS_API void ps_decomposition_free(ps_decomposition* dec);
PS_API ps_status ps_decomposition_eigenvalues(const ps_decomposition* dec, double* out, size_t capacity);

typedef struct ps_reconstruction_info {
  int has_mode;
  size_t significant;
  double threshold;
  double n1;
  double n2;
} ps_reconstruction_info;

/* threshold <= 0 selects the default significance threshold. The result is
 * kept inside dec. PS_ERR_MULTIMODE_SIGNAL when more than two eigenvalues
 * are significant (info is still filled). */
PS_API ps_status ps_reconstruct(ps_decomposition* dec, double threshold, ps_reconstruction_info* info);
/* Reconstructed mode on the bin centres (Σ|f|²·w = 1); conjugate selects -φ. */
PS_API ps_status ps_reconstruction_mode(const ps_decomposition* dec, int conjugate, double* re, double* im,
                                        double* phase, int* phase_defined, size_t capacity);
/* Branch-maximized fidelity against the bin-averaged target. When
 * restore_alpha is nonzero the reconstruction is first multiplied by
 * exp(i·restore_alpha·ln R) of the target. */
PS_API ps_status ps_reconstruction_fidelity(const ps_decomposition* dec, const ps_mode* target,
                                            double restore_alpha, double* fidelity);
PS_API ps_status ps_decomposition_write_json(const ps_decomposition* dec, const char* path);

typedef struct ps_photon_stats {
  double p[3];
  double sigma[3];
  int iterations;
  double log_likelihood;
} ps_photon_stats;

/* Uses the mode reconstructed by ps_reconstruct. */
PS_API ps_status ps_photon_stats_reconstructed(const ps_records* records, const ps_decomposition* dec,
                                               ps_photon_stats* out);
PS_API ps_status ps_photon_stats_for_mode(const ps_records* records, const ps_mode* mode, ps_photon_stats* out);

/* ---- storage, selectivity, conversion ------------------------------------ */

typedef struct ps_selectivity {
  double eta0;
  double eta_retrieve;
} ps_selectivity;

/* Outputs n_points samples of Δφ, the overlap model and the storage-ODE curve. */
PS_API ps_status ps_selectivity_sweep(const ps_shape_spec* base, const ps_scheme* scheme,
                                      const ps_pulse_options* opts, size_t n_points, double jump_time_us,
                                      double control_jump_rad, double* delta_phi, double* overlap_model,
                                      double* absorbed, ps_selectivity* info);

typedef struct ps_sin2_fit {
  double A;
  double B;
  double phi0;
  double rms_residual;
} ps_sin2_fit;

/* y ≈ A·sin²(x/2 + φ0) + B. */
PS_API ps_status ps_fit_sin2(const double* x, const double* y, size_t n, ps_sin2_fit* out);
/* Shift s in [0, 2π) with curve_b(x) ≈ curve_a(x - s). */
PS_API ps_status ps_fit_shift(const ps_sin2_fit* a, const ps_sin2_fit* b, double* shift);

typedef struct ps_conversion {
  double eta_analytic;
  double stored;
  double retrieved;
  double total;
  double analytic_product;
  double relative_deviation;
} ps_conversion;

/* Optional outputs receive new handles owned by the caller. */
PS_API ps_status ps_convert_shape(const ps_mode* input, const ps_mode* output, const ps_scheme* scheme,
                                  const ps_pulse_options* opts, ps_conversion* out, ps_pulse** storage_pulse,
                                  ps_pulse** retrieval_pulse, ps_mode** emitted_mode);

/* ---- efficiency budget --------------------------------------------------- */

typedef struct ps_budget_stage {
  const char* name;
  double efficiency;
  double uncertainty;
} ps_budget_stage;

/* cumulative (length n, optional) receives the running product. */
PS_API ps_status ps_loss_budget(const ps_budget_stage* stages, size_t n, double* total, double* uncertainty,
                                double* cumulative);
PS_API ps_status ps_source_brightness(const ps_budget_stage* p1, const ps_budget_stage* detection,
                                      const ps_budget_stage* preparation, double* value, double* uncertainty);

#ifdef __cplusplus
}
#endif

#endif
