#pragma once

#include <cstddef>
#include <vector>

#include "photonshape/cqed.hpp"
#include "photonshape/pulse.hpp"
#include "photonshape/temporal_mode.hpp"

namespace photonshape {

struct SelectivityOptions {
  std::size_t n_points = 72;  // Δφ = 2πk/n_points, k < n_points
  double jump_time = 0.0;     // µs
  double control_jump = 0.0;  // rad, phase jump imprinted on the stored mode
};

struct SelectivityPoint {
  double delta_phi = 0.0;
  double overlap_model = 0.0;  // eta0·|<accepted|input>|²
  double absorbed = 0.0;       // storage ODE |S_end|² times the retrieval efficiency
};

struct SelectivityCurve {
  double eta0 = 0.0;  // storage·retrieval efficiency of the matched mode
  double eta_retrieve = 0.0;
  std::vector<SelectivityPoint> points;
};

// Input photons carry a phase jump Δφ at jump_time; the control pulse stores
// the base shape carrying control_jump at the same time.
SelectivityCurve selectivity_sweep(const ShapeSpec& base, const CqedParams& params,
                                   const LevelScheme& scheme, const PulseOptions& pulse_opts,
                                   const SelectivityOptions& opts);

struct ConversionReport {
  double eta_analytic = 0.0;  // single-stage emission efficiency of the scheme
  double stored = 0.0;        // |S_end|² after the storage leg
  double retrieved = 0.0;     // emitted energy of the retrieval leg from S = 1
  double total = 0.0;         // stored·retrieved
  double analytic_product = 0.0;
  double relative_deviation = 0.0;  // total / analytic_product - 1
  ControlPulse storage;
  ControlPulse retrieval;
  TemporalMode output;  // normalized emitted mode of the retrieval leg
};

// Stores the input shape with its matched storage pulse (storage ODE), then
// re-emits into the output shape.
ConversionReport convert_shape(const TemporalMode& input, const TemporalMode& output,
                               const CqedParams& params, const LevelScheme& scheme,
                               const PulseOptions& pulse_opts);

}  // namespace photonshape
