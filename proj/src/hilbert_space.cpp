#include <algorithm>
#include <cmath>
#include <map>

#include "photonshape/angular.hpp"
#include "photonshape/error.hpp"
#include "photonshape/lindblad.hpp"
#include "photonshape/units.hpp"

namespace photonshape {
namespace {

double dipole(const ReferenceData& ref, int F, int m, int Fp, int mp) {
  return angular::dipole_coupling(
      {ref.two_I, ref.two_J_ground, ref.two_J_excited, 2 * F, 2 * m, 2 * Fp, 2 * mp});
}

int manifold_index(const ReferenceData& ref, int Fp) {
  const auto& v = ref.excited_manifolds;
  return static_cast<int>(std::find(v.begin(), v.end(), Fp) - v.begin());
}

bool manifold_active(const LevelScheme& scheme, int Fp) {
  return manifold_index(scheme.reference, Fp) < active_manifolds(scheme.variant);
}

}  // namespace

std::string AtomicLevel::label() const {
  std::string s = excited ? "Fp" : "F";
  s += std::to_string(F) + "_m";
  s += m < 0 ? "m" + std::to_string(-m) : std::to_string(m);
  return s;
}

std::size_t HilbertSpaceSpec::index(std::size_t atom, int n_plus, int n_minus) const {
  return (atom * fock_levels + n_plus) * fock_levels + n_minus;
}

int HilbertSpaceSpec::photons(std::size_t i, int mode) const {
  const std::size_t cav = i % (fock_levels * fock_levels);
  return mode == kSigmaPlus ? static_cast<int>(cav / fock_levels)
                            : static_cast<int>(cav % fock_levels);
}

int HilbertSpaceSpec::find_level(bool excited, int F, int m) const {
  for (std::size_t a = 0; a < atomic_levels.size(); ++a) {
    const auto& l = atomic_levels[a];
    if (l.excited == excited && l.F == F && l.m == m) return static_cast<int>(a);
  }
  return -1;
}

int HilbertSpaceSpec::excitation_number(std::size_t i) const {
  const auto& l = atomic_levels[atom_of(i)];
  const int atom = (l.excited || l.F != lowest_ground_F) ? 1 : 0;
  return atom + photons(i, kSigmaPlus) + photons(i, kSigmaMinus);
}

HilbertSpaceSpec build_space(const LevelScheme& scheme) {
  require(scheme.couplings == CouplingMode::ClebschGordan, ErrorCode::InvalidArgument,
          "the master-equation model uses physical dipole couplings; unit couplings are "
          "analytic-only");
  const ReferenceData& ref = scheme.reference;
  HilbertSpaceSpec s;
  s.lowest_ground_F = ref.ground_manifolds.front();
  for (int F : ref.ground_manifolds) {
    for (int m = -F; m <= F; ++m) s.atomic_levels.push_back({false, F, m});
  }
  s.n_ground = s.atomic_levels.size();
  const int F_storage = ref.lambda_storage_F;
  for (int Fp : ref.excited_manifolds) {
    const int mmax = std::min(Fp, F_storage);
    for (int m = -mmax; m <= mmax; ++m) s.atomic_levels.push_back({true, Fp, m});
  }
  s.n_excited = s.atomic_levels.size() - s.n_ground;
  return s;
}

OperatorMatrix OperatorMatrix::from_triplets(std::size_t dimension, std::vector<Triplet> t) {
  std::map<std::pair<std::size_t, std::size_t>, cplx> merged;
  for (const auto& e : t) {
    require(e.row < dimension && e.col < dimension, ErrorCode::InvalidArgument,
            "operator entry out of range");
    merged[{e.row, e.col}] += e.value;
  }
  OperatorMatrix m;
  m.dimension = dimension;
  for (const auto& [rc, v] : merged) {
    if (v != cplx(0.0)) m.entries.push_back({rc.first, rc.second, v});
  }
  return m;
}

cplx OperatorMatrix::at(std::size_t r, std::size_t c) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(r, c),
                                   [](const Triplet& e, const std::pair<std::size_t, std::size_t>& k) {
                                     return std::make_pair(e.row, e.col) < k;
                                   });
  return (it != entries.end() && it->row == r && it->col == c) ? it->value : cplx(0.0);
}

OperatorMatrix OperatorMatrix::adjoint() const {
  std::vector<Triplet> t;
  t.reserve(entries.size());
  for (const auto& e : entries) t.push_back({e.col, e.row, std::conj(e.value)});
  return from_triplets(dimension, std::move(t));
}

double OperatorMatrix::hermiticity_residual() const {
  double r = 0.0;
  for (const auto& e : entries) r = std::max(r, std::abs(e.value - std::conj(at(e.col, e.row))));
  return r;
}

std::vector<CouplingTerm> control_terms(const HilbertSpaceSpec& space, const LevelScheme& scheme) {
  const ReferenceData& ref = scheme.reference;
  std::vector<CouplingTerm> out;
  for (std::size_t e = space.n_ground; e < space.atomic_dimension(); ++e) {
    const auto& lv = space.atomic_levels[e];
    if (!manifold_active(scheme, lv.F)) continue;
    const int s = space.find_level(false, ref.lambda_storage_F, lv.m);
    if (s < 0) continue;
    out.push_back({static_cast<std::size_t>(s), e, -1, dipole(ref, ref.lambda_storage_F, lv.m, lv.F, lv.m)});
  }
  return out;
}

std::vector<CouplingTerm> cavity_terms(const HilbertSpaceSpec& space, const LevelScheme& scheme) {
  const ReferenceData& ref = scheme.reference;
  const int F = space.lowest_ground_F;
  std::vector<CouplingTerm> out;
  for (int m = -F; m <= F; ++m) {
    const auto gl = static_cast<std::size_t>(space.find_level(false, F, m));
    for (int mode = 0; mode < 2; ++mode) {
      const int mp = m + kModeMu[mode];
      for (int Fp : ref.excited_manifolds) {
        if (!manifold_active(scheme, Fp)) continue;
        const int e = space.find_level(true, Fp, mp);
        if (e < 0) continue;
        const double c = dipole(ref, F, m, Fp, mp);
        if (c != 0.0) out.push_back({gl, static_cast<std::size_t>(e), mode, c});
      }
    }
  }
  return out;
}

int signal_mode(const LevelScheme& scheme) {
  const int mu = scheme.reference.lambda_excited_m - scheme.reference.lambda_ground_m;
  require(mu == 1 || mu == -1, ErrorCode::Configuration,
          "cavity transition of the Λ scheme must be circularly polarized");
  return mu == 1 ? kSigmaPlus : kSigmaMinus;
}

OperatorMatrix control_operator(const HilbertSpaceSpec& space, const LevelScheme& scheme) {
  std::vector<Triplet> t;
  for (const auto& term : control_terms(space, scheme)) {
    if (term.coefficient == 0.0) continue;
    for (int np = 0; np < space.fock_levels; ++np) {
      for (int nm = 0; nm < space.fock_levels; ++nm) {
        t.push_back({space.index(term.excited_level, np, nm), space.index(term.ground_level, np, nm),
                     -0.5 * term.coefficient});
      }
    }
  }
  return OperatorMatrix::from_triplets(space.dimension(), std::move(t));
}

OperatorMatrix build_hamiltonian(const HilbertSpaceSpec& space, cplx omega,
                                 const CqedParams& params, const LevelScheme& scheme) {
  validate(params);
  const ReferenceData& ref = scheme.reference;
  const auto delta = scheme.detunings();
  const double g = units::angular(params.g);
  std::vector<Triplet> t;
  for (std::size_t e = space.n_ground; e < space.atomic_dimension(); ++e) {
    const double d = units::angular(delta[manifold_index(ref, space.atomic_levels[e].F)]);
    for (int np = 0; np < space.fock_levels; ++np) {
      for (int nm = 0; nm < space.fock_levels; ++nm) t.push_back({space.index(e, np, nm), space.index(e, np, nm), d});
    }
  }
  for (const auto& term : cavity_terms(space, scheme)) {
    const double v = -g * term.coefficient;
    for (int other = 0; other < space.fock_levels; ++other) {
      // |g, 1_μ> <-> |e, 0_μ>, other mode spectator
      const std::size_t gi = term.mode == kSigmaPlus ? space.index(term.ground_level, 1, other)
                                                     : space.index(term.ground_level, other, 1);
      const std::size_t ei = term.mode == kSigmaPlus ? space.index(term.excited_level, 0, other)
                                                     : space.index(term.excited_level, other, 0);
      t.push_back({ei, gi, v});
      t.push_back({gi, ei, v});
    }
  }
  for (const auto& e : control_operator(space, scheme).entries) {
    t.push_back({e.row, e.col, omega * e.value});
    t.push_back({e.col, e.row, std::conj(omega) * e.value});
  }
  OperatorMatrix h = OperatorMatrix::from_triplets(space.dimension(), std::move(t));
  require(h.hermiticity_residual() < 1e-12, ErrorCode::InvalidArgument,
          "internal: Hamiltonian is not Hermitian");
  return h;
}

std::vector<CollapseOperator> build_collapse_ops(const HilbertSpaceSpec& space,
                                                 const CqedParams& params,
                                                 const LevelScheme& scheme) {
  validate(params);
  const ReferenceData& ref = scheme.reference;
  std::vector<CollapseOperator> ops;
  const double rates[2] = {units::angular(params.kappa_c), units::angular(params.kappa_l)};
  for (int mode = 0; mode < 2; ++mode) {
    for (int channel = 0; channel < 2; ++channel) {
      std::vector<Triplet> t;
      const double amp = std::sqrt(2.0 * rates[channel]);
      for (std::size_t a = 0; a < space.atomic_dimension(); ++a) {
        for (int other = 0; other < space.fock_levels; ++other) {
          const std::size_t from = mode == kSigmaPlus ? space.index(a, 1, other) : space.index(a, other, 1);
          const std::size_t to = mode == kSigmaPlus ? space.index(a, 0, other) : space.index(a, other, 0);
          t.push_back({to, from, amp});
        }
      }
      const int sink = 2 * mode + channel;
      ops.push_back({OperatorMatrix::from_triplets(space.dimension(), std::move(t)), kSinkName[sink], sink});
    }
  }

  double total_check = 0.0;
  const double amp = std::sqrt(2.0 * units::angular(params.gamma));
  for (int Fp : ref.excited_manifolds) {
    for (int F : ref.ground_manifolds) {
      for (int q = -1; q <= 1; ++q) {
        std::vector<Triplet> t;
        for (std::size_t e = space.n_ground; e < space.atomic_dimension(); ++e) {
          const auto& lv = space.atomic_levels[e];
          if (lv.F != Fp) continue;
          const int g = space.find_level(false, F, lv.m + q);
          if (g < 0) continue;
          const double c = dipole(ref, F, lv.m + q, Fp, lv.m);
          if (c == 0.0) continue;
          total_check += c * c;
          for (int np = 0; np < space.fock_levels; ++np) {
            for (int nm = 0; nm < space.fock_levels; ++nm) {
              t.push_back({space.index(static_cast<std::size_t>(g), np, nm), space.index(e, np, nm), amp * c});
            }
          }
        }
        if (t.empty()) continue;
        const std::string label = "decay_Fp" + std::to_string(Fp) + "_F" + std::to_string(F) + "_q" +
                                  (q < 0 ? "m1" : (q == 0 ? "0" : "p1"));
        ops.push_back({OperatorMatrix::from_triplets(space.dimension(), std::move(t)), label, -1});
      }
    }
  }
  require(std::abs(total_check - static_cast<double>(space.n_excited)) < 1e-9,
          ErrorCode::Configuration, "decay branching coefficients are not normalized");
  return ops;
}

}  // namespace photonshape
