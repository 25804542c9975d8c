#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "photonshape/homodyne.hpp"
#include "photonshape/lindblad.hpp"
#include "photonshape/pulse.hpp"
#include "photonshape/temporal_mode.hpp"

namespace photonshape::io {

// Mode CSV: "# photonshape-mode t0=<µs> dt=<µs> n=<count> units=us,us^-1/2"
// then "t,re,im" rows. Values are written with 17 significant digits and
// the grid is rebuilt from the header, so a round trip is bit-exact. A
// two-column body (t,re) is read as a real mode.
void write_mode_csv(std::ostream& out, const TemporalMode& mode);
TemporalMode read_mode_csv(std::istream& in);

// Pulse CSV: "# photonshape-pulse direction=<emission|storage> t0= dt= n=
// compensation=<0|1> omega_max= tail_epsilon= units=us,rad/us" then
// "t,omega_re,omega_im,abs_omega_mhz,arg_omega,h" rows. h is recomputed on read.
void write_pulse_csv(std::ostream& out, const ControlPulse& pulse);
ControlPulse read_pulse_csv(std::istream& in);

// Records CSV: "# photonshape-records t_start= bin_width= n_bins= trials=
// normalization=vacuum-unit-variance" then a "x0,...,x{n-1}" header and one
// row per trial.
void write_records_csv(std::ostream& out, const QuadratureRecords& records);
QuadratureRecords read_records_csv(std::istream& in);

// Per-time simulation table: t, population per atomic level (cavity vacuum),
// flux, cumulative out-coupled and lost per polarization, coherent amplitude,
// trace.
void write_sim_csv(std::ostream& out, const SimResult& sim);
std::string emission_summary_json(const EmissionReport& report);

std::string decomposition_json(const ModeDecomposition& dec, const ReconstructedMode* rec);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace photonshape::io
