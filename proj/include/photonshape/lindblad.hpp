#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "photonshape/cqed.hpp"
#include "photonshape/pulse.hpp"
#include "photonshape/temporal_mode.hpp"

namespace photonshape {

// Atomic level |F, m>; excited levels carry excited = true.
struct AtomicLevel {
  bool excited = false;
  int F = 0;
  int m = 0;
  std::string label() const;
};

// Cavity polarization modes indexed by photon angular momentum μ = m' - m
// of the emitting transition: index 0 is σ+ (μ = +1), index 1 is σ- (μ = -1).
inline constexpr int kSigmaPlus = 0;
inline constexpr int kSigmaMinus = 1;
inline constexpr std::array<int, 2> kModeMu = {+1, -1};
inline constexpr std::array<const char*, 2> kModeName = {"sigma_plus", "sigma_minus"};

// Basis |atom> ⊗ |n+> ⊗ |n->, index = atom·4 + n+·2 + n-. Atomic order:
// ground manifolds ascending (m ascending), then excited manifolds
// ascending (m ascending). Sinks (out/lost per mode) are classical
// accumulators outside the tensor space.
struct HilbertSpaceSpec {
  std::vector<AtomicLevel> atomic_levels;
  std::size_t n_ground = 0;
  std::size_t n_excited = 0;
  int fock_levels = 2;

  std::size_t atomic_dimension() const { return atomic_levels.size(); }
  std::size_t dimension() const { return atomic_levels.size() * fock_levels * fock_levels; }
  std::size_t index(std::size_t atom, int n_plus, int n_minus) const;
  std::size_t atom_of(std::size_t i) const { return i / (fock_levels * fock_levels); }
  int photons(std::size_t i, int mode) const;
  // Returns -1 when the level is not part of the space.
  int find_level(bool excited, int F, int m) const;
  // Photons plus one if the atom is outside the lowest ground manifold;
  // conserved by the Hamiltonian.
  int excitation_number(std::size_t i) const;
  int lowest_ground_F = 0;
};

HilbertSpaceSpec build_space(const LevelScheme& scheme);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

// Sparse complex matrix; entries are merged and sorted row-major.
struct OperatorMatrix {
  std::size_t dimension = 0;
  std::vector<Triplet> entries;

  static OperatorMatrix from_triplets(std::size_t dimension, std::vector<Triplet> t);
  cplx at(std::size_t r, std::size_t c) const;
  OperatorMatrix adjoint() const;
  double hermiticity_residual() const;
};

struct CouplingTerm {
  std::size_t ground_level;
  std::size_t excited_level;
  int mode;  // -1 for the control field
  double coefficient;
};

// Structural coupling lists (including symmetry-forbidden zeros for the
// control field), restricted to the manifolds active in the variant.
std::vector<CouplingTerm> control_terms(const HilbertSpaceSpec& space, const LevelScheme& scheme);
std::vector<CouplingTerm> cavity_terms(const HilbertSpaceSpec& space, const LevelScheme& scheme);

// Coefficient of Ω in H: -½ Σ c_s |e⟩⟨s| over the control terms.
OperatorMatrix control_operator(const HilbertSpaceSpec& space, const LevelScheme& scheme);

// Index (0 = σ+, 1 = σ-) of the cavity mode carrying the Λ-scheme photon.
int signal_mode(const LevelScheme& scheme);

// H = Σ Δ_i|e⟩⟨e| - g Σ c (|e⟩⟨g|a_μ + h.c.) - ½ Σ c_s (Ω|e⟩⟨s| + h.c.), rad/µs.
OperatorMatrix build_hamiltonian(const HilbertSpaceSpec& space, cplx omega,
                                 const CqedParams& params, const LevelScheme& scheme);

struct CollapseOperator {
  OperatorMatrix op;
  std::string label;
  int sink = -1;  // 0..3 = out σ+, lost σ+, out σ-, lost σ-
};

inline constexpr std::array<const char*, 4> kSinkName = {"out_sigma_plus", "lost_sigma_plus",
                                                         "out_sigma_minus", "lost_sigma_minus"};

// Cavity: √(2κ_c)a_μ and √(2κ_l)a_μ per mode. Atom: one operator per
// (F', F, q) decay channel, √(2γ)·Σ c|F,m⟩⟨F',m'|.
std::vector<CollapseOperator> build_collapse_ops(const HilbertSpaceSpec& space,
                                                 const CqedParams& params,
                                                 const LevelScheme& scheme);

enum class Integrator { RK4, Adaptive };

struct InitialState {
  std::optional<std::size_t> atom_level;  // default: the storage level of the Λ scheme
  int photon_mode = -1;                   // -1: cavity vacuum
};

struct SimConfig {
  double t_start = 0.0;
  double t_end = 1.0;
  double output_dt = 1e-3;
  Integrator integrator = Integrator::RK4;
  // Fixed step satisfies dt·max(|Δ_i|, |Ω|, g, κ, γ)·2π <= step_bound.
  double step_bound = 0.1;
  double max_step = 0.0;  // optional additional cap (µs), 0 = none
  double rtol = 1e-9;
  double atol = 1e-11;
  double trace_tolerance = 1e-5;
  const ControlPulse* pulse = nullptr;  // Ω(t) linearly interpolated, zero outside
  InitialState initial;
};

struct SimResult {
  std::vector<double> times;
  std::vector<std::string> level_labels;
  std::vector<std::vector<double>> atomic_populations;  // [time][level], cavity vacuum
  std::vector<std::array<double, 2>> photon_number;
  std::vector<std::array<double, 2>> flux_out;     // 2κ_c⟨n_μ⟩, 1/µs
  std::vector<std::array<double, 2>> out_coupled;  // cumulative
  std::vector<std::array<double, 2>> lost;         // cumulative
  std::vector<double> trace;
  // No-jump amplitude √(2κ_c)·ψ(t) of the signal-mode photon, µs^-1/2.
  int signal_mode = kSigmaMinus;
  std::vector<cplx> coherent_amplitude;
  std::vector<double> coherent_cumulative;
  double max_trace_drift = 0.0;
  double step = 0.0;  // fixed step used (RK4) or smallest accepted (adaptive)
  std::size_t steps = 0;
  std::size_t block_dimension = 0;
};

// Lindblad evolution. The Hamiltonian conserves the excitation number and
// every collapse operator lowers it by at most one, so from a one-excitation
// initial state the density matrix stays inside the one-excitation block plus
// classical accumulators for populations that decayed out of it.
SimResult evolve(const HilbertSpaceSpec& space, const SimConfig& config, const CqedParams& params,
                 const LevelScheme& scheme);

struct SimOptions {
  Integrator integrator = Integrator::RK4;
  double step_bound = 0.1;
  double tail = 0.3;  // µs of free evolution after the pulse
  double rtol = 1e-9;
  double atol = 1e-11;
};

struct EmissionReport {
  SimResult sim;
  double analytic_efficiency = 0.0;
  double efficiency = 0.0;           // cumulative out-coupled, signal polarization
  double wrong_polarization = 0.0;   // cumulative out-coupled, other polarization
  double coherent_efficiency = 0.0;  // ∫|coherent amplitude|² dt
  double incoherent_fraction = 0.0;  // (all out-coupled - coherent) / all out-coupled
  double wrong_polarization_fraction = 0.0;
  std::optional<TemporalMode> coherent_mode;  // on the simulation output grid
  std::optional<TemporalMode> target;         // zero-extended target on the same grid
  double mode_fidelity = 0.0;       // coherent mode vs target
  double intensity_fidelity = 0.0;  // √(signal flux) vs |target|
  // Output lag behind the target (integer samples, maximizing overlap) and
  // the fidelity after removing it.
  double arrival_delay = 0.0;
  double aligned_mode_fidelity = 0.0;
};

EmissionReport simulate_pulse(const CqedParams& params, const LevelScheme& scheme,
                              const ControlPulse& pulse, const SimOptions& opts);

EmissionReport emission_experiment(const CqedParams& params, const LevelScheme& scheme,
                                   const TemporalMode& target, const PulseOptions& pulse_opts,
                                   const SimOptions& sim_opts);

}  // namespace photonshape
