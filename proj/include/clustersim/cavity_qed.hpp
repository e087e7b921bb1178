// Copyright 2026 The clustersim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Cavity-QED cluster-state generation: resonant two-atom stage dynamics
// with optional conditional (no-jump) decay, the classical repumping pulse,
// N-atom chaining, closed-form single-excitation oracles, and the cavity
// geometry / error-budget formulas.
//
// Units: times in 1/g1, rates in g1, hbar = 1.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clustersim/cluster_verify.hpp"
#include "clustersim/core_linalg.hpp"

namespace clustersim {

/// Three-level atom: |g> ground, |e> excited, |i> spectator. The cavity
/// couples only the g <-> e transition; |i> couples to nothing.
enum class AtomLevel : int { g = 0, e = 1, i = 2 };

inline constexpr int kAtomDim = 3;
inline constexpr const char* kCavityLabel = "cavity";
inline constexpr double kCanonicalG2Ratio = 1.7320508075688772;  // sqrt(3)
inline constexpr double kPi = std::numbers::pi_v<double>;

/// One two-atom cavity pass. The canonical choice t = pi/g1, g2 = sqrt3 g1
/// makes the pass a perfect entangling map with the cavity returned to
/// vacuum.
struct StageConfig {
  double g1 = 1.0;
  double g2 = kCanonicalG2Ratio;
  double t = kPi;
  double kappa = 0.0;  // cavity decay rate
  double tau = 0.0;    // atomic spontaneous emission rate
  int n_max = 2;       // Fock truncation; the top level is a leakage sentinel

  static StageConfig canonical(double kappa = 0.0, double tau = 0.0, int n_max = 2) {
    StageConfig c;
    c.kappa = kappa;
    c.tau = tau;
    c.n_max = n_max;
    c.validate();
    return c;
  }

  void validate() const {
    if (!(g1 > 0.0)) throw std::invalid_argument("stage: g1 must be > 0");
    if (g2 < 0.0) throw std::invalid_argument("stage: g2 must be >= 0");
    if (t < 0.0) throw std::invalid_argument("stage: t must be >= 0");
    if (kappa < 0.0 || tau < 0.0) throw std::invalid_argument("stage: rates must be >= 0");
    if (n_max < 1) throw std::invalid_argument("stage: n_max must be >= 1");
  }

  bool is_canonical() const { return t == kPi / g1 && g2 == kCanonicalG2Ratio * g1; }
};

struct StageResult {
  StateVector state;            // cavity factor removed
  double survival_probability;  // norm^2 ratio across the conditional evolution
  double cavity_leakage;        // branch population left outside cavity vacuum
};

struct ChainResult {
  StateVector state;  // N atoms
  double success_probability;
  double fidelity;  // against the N-qubit cluster target
  std::vector<StageResult> per_stage;
};

/// timing_offset_stage result; fidelity is evaluated against the ideal
/// (zero-offset, zero-decay) stage image with the residual cavity
/// entanglement handled by the reduced-fidelity convention
/// F = sum_n |<target (x) n|psi>|^2 / ||psi||^2.
struct TimingOffsetResult {
  StateVector state;
  double survival_probability;
  double cavity_leakage;
  double fidelity;
};

inline StateVector atom_state(const std::string& label, Complex g, Complex e, Complex i) {
  SubsystemLayout layout({{label, kAtomDim}});
  Vector v(kAtomDim);
  v << g, e, i;
  return StateVector(std::move(layout), std::move(v));
}

/// (|g> + |e>)/sqrt2: the head atom of a chain.
inline StateVector atom_plus_e(const std::string& label) {
  const double r = 1.0 / std::sqrt(2.0);
  return atom_state(label, r, r, 0.0);
}

/// (|g> + |i>)/sqrt2: every follower atom before its stage.
inline StateVector atom_plus_i(const std::string& label) {
  const double r = 1.0 / std::sqrt(2.0);
  return atom_state(label, r, 0.0, r);
}

inline StateVector cavity_vacuum(int n_max, const std::string& label = kCavityLabel) {
  if (n_max < 1) throw std::invalid_argument("cavity: n_max must be >= 1");
  return StateVector::basis(SubsystemLayout({{label, n_max + 1}}), {0});
}

namespace detail {

inline Matrix atom_lowering() {
  Matrix m = Matrix::Zero(kAtomDim, kAtomDim);
  m(static_cast<int>(AtomLevel::g), static_cast<int>(AtomLevel::e)) = 1.0;  // |g><e|
  return m;
}

inline Matrix excited_projector() {
  Matrix m = Matrix::Zero(kAtomDim, kAtomDim);
  m(static_cast<int>(AtomLevel::e), static_cast<int>(AtomLevel::e)) = 1.0;
  return m;
}

inline Matrix fock_annihilation(int n_max) {
  Matrix m = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) m(n - 1, n) = std::sqrt(double(n));
  return m;
}

// Lifts a one-factor matrix to the full stage space.
inline Matrix lift(const SubsystemLayout& layout, const std::string& label, const Matrix& m) {
  Operator op(SubsystemLayout({{label, int(m.rows())}}), m);
  return embed(op, {label}, layout).matrix;
}

// Jaynes-Cummings coupling plus conditional decay for the atoms named in
// `coupled` (coupling strengths aligned with that list). tau acts only on
// coupled atoms: an atom outside the cavity neither exchanges nor decays.
inline Operator cavity_pass_hamiltonian(int n_max, double kappa, double tau,
                                        const std::vector<std::pair<std::string, double>>& coupled,
                                        bool conditional) {
  SubsystemLayout layout({{"atom1", kAtomDim}, {"atom2", kAtomDim}, {kCavityLabel, n_max + 1}});
  const Matrix sm = atom_lowering();
  const Matrix sp = sm.adjoint();
  const Matrix a = fock_annihilation(n_max);
  const Matrix ad = a.adjoint();
  const Matrix la = lift(layout, kCavityLabel, a);
  const Matrix lad = lift(layout, kCavityLabel, ad);
  Matrix h = Matrix::Zero(layout.total_dimension(), layout.total_dimension());
  for (const auto& [label, g] : coupled) {
    h += g * (lad * lift(layout, label, sm) + la * lift(layout, label, sp));
  }
  if (conditional) {
    const Complex mi(0.0, -1.0);
    h += mi * (kappa / 2.0) * (lad * la);
    for (const auto& [label, g] : coupled) {
      (void)g;
      h += mi * (tau / 2.0) * lift(layout, label, excited_projector());
    }
  }
  return Operator(std::move(layout), std::move(h));
}

}  // namespace detail

/// Two-atom stage Hamiltonian on atom1(3) x atom2(3) x cavity(n_max+1).
/// conditional=false gives the Hermitian resonant exchange
/// g1 (a+ S1- + a S1+) + g2 (a+ S2- + a S2+); conditional=true adds the
/// no-jump decay terms -i kappa/2 a+a - i tau/2 sum_j |e><e|_j.
inline Operator stage_hamiltonian(const StageConfig& cfg, bool conditional) {
  cfg.validate();
  return detail::cavity_pass_hamiltonian(cfg.n_max, cfg.kappa, cfg.tau,
                                         {{"atom1", cfg.g1}, {"atom2", cfg.g2}}, conditional);
}

/// One addend of a closed-form stage map, e.g. {"gg1", -0.3i}. The label
/// spells atom1 level, atom2 level, cavity Fock count.
struct BranchAmplitude {
  std::string basis;
  Complex amplitude;
};

/// Flat index of a stage basis label such as "eg0" in the
/// atom1 x atom2 x cavity layout.
inline long stage_basis_index(const std::string& label, int n_max) {
  if (label.size() != 3) throw std::invalid_argument("stage basis: label must have 3 symbols");
  auto level = [](char c) {
    switch (c) {
      case 'g': return 0;
      case 'e': return 1;
      case 'i': return 2;
      default: throw std::invalid_argument("stage basis: unknown atom level");
    }
  };
  const int n = label[2] - '0';
  if (n < 0 || n > n_max) throw std::invalid_argument("stage basis: Fock index out of range");
  return (long(level(label[0])) * kAtomDim + level(label[1])) * (n_max + 1) + n;
}

/// Closed-form image of the four initial states |eg0>, |ei0>, |gg0>, |gi0>
/// under the zero-decay stage evolution, with E = sqrt(g1^2 + g2^2):
///   |eg0> -> (g1/E)[ (g1 cos Et + g2^2/g1)/E |eg0>
///                    + g2 (cos Et - 1)/E |ge0> - i sin Et |gg1> ]
///   |ei0> -> cos(g1 t) |ei0> - i sin(g1 t) |gi1>
///   |gg0>, |gi0> -> unchanged.
inline std::vector<BranchAmplitude> closed_form_branch(const std::string& branch, double t,
                                                       double g1, double g2) {
  if (!(g1 > 0.0) || g2 < 0.0 || t < 0.0)
    throw std::invalid_argument("closed form: need g1 > 0, g2 >= 0, t >= 0");
  const Complex mi(0.0, -1.0);
  if (branch == "eg") {
    const double e = std::hypot(g1, g2);
    const double c = std::cos(e * t);
    const double pre = g1 / e;
    return {{"eg0", pre * (g1 * c + g2 * g2 / g1) / e},
            {"ge0", pre * g2 * (c - 1.0) / e},
            {"gg1", pre * mi * std::sin(e * t)}};
  }
  if (branch == "ei") return {{"ei0", std::cos(g1 * t)}, {"gi1", mi * std::sin(g1 * t)}};
  if (branch == "gg") return {{"gg0", 1.0}};
  if (branch == "gi") return {{"gi0", 1.0}};
  throw std::invalid_argument("closed form: unknown branch '" + branch + "'");
}

/// Classical field tuned so that |i> -> -|e>. The unitary completion maps
/// |e> -> |i> and leaves |g> alone; wherever the protocol applies the pulse
/// the target atom has no |e> population, so the completion choice is
/// observationally irrelevant and is fixed here for determinism.
inline StateVector classical_pulse(const StateVector& state, const std::string& atom_label) {
  Matrix u = Matrix::Zero(kAtomDim, kAtomDim);
  u(0, 0) = 1.0;
  u(2, 1) = 1.0;   // |e> -> |i>
  u(1, 2) = -1.0;  // |i> -> -|e>
  return apply_to_factors(u, {atom_label}, state);
}

namespace detail {

struct PassOutcome {
  StateVector with_cavity;  // after evolution and pulse, cavity still attached
  double survival;
  double norm2_after;
};

inline void check_stage_register(const StateVector& reg,
                                 const std::pair<std::string, std::string>& atoms) {
  if (reg.layout().has(kCavityLabel))
    throw std::invalid_argument("stage: register must not already carry a cavity factor");
  if (atoms.first == atoms.second) throw std::invalid_argument("stage: atoms must differ");
  for (const auto& lbl : {atoms.first, atoms.second})
    if (reg.layout().factor(reg.layout().index_of(lbl)).dim != kAtomDim)
      throw std::invalid_argument("stage: '" + lbl + "' is not a three-level atom");
}

inline PassOutcome run_pass(const StateVector& reg,
                            const std::pair<std::string, std::string>& atoms,
                            const StageConfig& cfg, const std::vector<Matrix>& unitaries) {
  const double before = reg.norm2();
  if (before <= 0.0) throw std::domain_error("stage: zero input state");
  StateVector s = tensor({reg, cavity_vacuum(cfg.n_max)});
  const std::vector<std::string> targets{atoms.first, atoms.second, kCavityLabel};
  for (const Matrix& u : unitaries) s = apply_to_factors(u, targets, s);
  const double after = s.norm2();
  if (after > 0.0 && s.factor_population(kCavityLabel, cfg.n_max) / after > 1e-10)
    throw std::runtime_error("stage: population reached the Fock truncation level; raise n_max");
  s = classical_pulse(s, atoms.second);
  return {std::move(s), after / before, after};
}

inline std::pair<StateVector, double> detach_cavity(const PassOutcome& pass) {
  StateVector projected = pass.with_cavity.project_factor(kCavityLabel, 0);
  double leakage = 0.0;
  if (pass.norm2_after > 0.0)
    leakage = std::max(0.0, (pass.norm2_after - projected.norm2()) / pass.norm2_after);
  return {std::move(projected), leakage};
}

}  // namespace detail

/// Sends the named atom pair through a fresh vacuum cavity: attaches the
/// cavity, evolves conditionally for cfg.t, applies the classical pulse to
/// the second atom, then projects the cavity back onto vacuum and detaches
/// it. survival_probability is the norm^2 ratio across the evolution (the
/// no-jump branch weight); cavity_leakage is the branch fraction found
/// outside vacuum at the end of the pass. A canonical stage with
/// kappa == tau must return the cavity to vacuum, so leakage beyond 1e-9
/// there is treated as an internal error.
inline StageResult run_stage(const StateVector& reg,
                             const std::pair<std::string, std::string>& atoms,
                             const StageConfig& cfg) {
  cfg.validate();
  detail::check_stage_register(reg, atoms);
  const Operator h = stage_hamiltonian(cfg, true);
  const Complex mi(0.0, -1.0);
  const Matrix u = matrix_exponential(mi * cfg.t * h.matrix);
  auto pass = detail::run_pass(reg, atoms, cfg, {u});
  auto [projected, leakage] = detail::detach_cavity(pass);
  if (cfg.is_canonical() && cfg.kappa == cfg.tau && leakage > 1e-9)
    throw std::runtime_error("stage: canonical pass failed to disentangle the cavity");
  return {std::move(projected), pass.survival, leakage};
}

inline constexpr int kDefaultMaxChainAtoms = 8;

inline std::string chain_atom_label(int j) { return "atom" + std::to_string(j); }

/// Eq.-style chain initial state: atom 1 in (|g>+|e>)/sqrt2, atoms 2..N in
/// (|g>+|i>)/sqrt2.
inline StateVector chain_initial_state(int n_atoms) {
  std::vector<StateVector> parts;
  parts.push_back(atom_plus_e(chain_atom_label(1)));
  for (int j = 2; j <= n_atoms; ++j) parts.push_back(atom_plus_i(chain_atom_label(j)));
  return tensor(parts);
}

/// Runs stages on pairs (1,2), (2,3), ..., (N-1,N), each pass followed by
/// the classical pulse on the higher-index atom. Atoms outside the cavity
/// are decoherence-free between stages. Success probability is the product
/// of the per-stage survival probabilities; fidelity is measured against
/// the N-qubit cluster target.
inline ChainResult run_chain(int n_atoms, const StageConfig& cfg,
                             int max_atoms = kDefaultMaxChainAtoms) {
  if (n_atoms < 2) throw std::invalid_argument("chain: need at least two atoms");
  if (n_atoms > max_atoms)
    throw std::invalid_argument("chain: dimension guard, raise max_atoms to go beyond " +
                                std::to_string(max_atoms));
  StateVector reg = chain_initial_state(n_atoms);
  std::vector<StageResult> stages;
  double prob = 1.0;
  for (int j = 1; j < n_atoms; ++j) {
    StageResult sr = run_stage(reg, {chain_atom_label(j), chain_atom_label(j + 1)}, cfg);
    prob *= sr.survival_probability;
    reg = sr.state;
    stages.push_back(std::move(sr));
  }
  const double fid = cluster_fidelity(reg, n_atoms);
  return {std::move(reg), prob, fid, std::move(stages)};
}

/// Closed-form chain metrics for uniform decay kappa == tau at canonical
/// timing. With d = exp(-pi kappa / (2 g1)) each of the N-1 passes
/// contributes fidelity (1+d)^2 / (2 (1+d^2)) and survival (1+d^2)/2; both
/// exponentiate because only the in-cavity pair decays. Valid only for
/// kappa == tau, where the anti-Hermitian part is proportional to the
/// conserved excitation number; otherwise simulate.
inline std::pair<double, double> expected_chain_metrics(int n_atoms, double kappa,
                                                        double tau) {
  if (n_atoms < 2) throw std::invalid_argument("chain metrics: need at least two atoms");
  if (kappa < 0.0) throw std::invalid_argument("chain metrics: kappa must be >= 0");
  if (kappa != tau)
    throw std::invalid_argument(
        "chain metrics: closed form requires kappa == tau; use run_chain for kappa != tau");
  const double d = std::exp(-0.5 * kPi * kappa);
  const double f1 = (1.0 + d) * (1.0 + d) / (2.0 * (1.0 + d * d));
  const double p1 = (1.0 + d * d) / 2.0;
  return {std::pow(f1, n_atoms - 1), std::pow(p1, n_atoms - 1)};
}

inline std::pair<double, double> expected_chain_metrics(int n_atoms, double kappa) {
  return expected_chain_metrics(n_atoms, kappa, kappa);
}

/// Stage variant where one atom enters the cavity offset_fraction * t
/// early (and leaves that much early): the early atom evolves alone under
/// its own single-atom resonant coupling for offset * t, both atoms for
/// (1 - offset) * t, then the late atom alone for offset * t, so each atom
/// spends t inside. Pulse and cavity handling follow run_stage. The
/// reported fidelity compares against the ideal zero-offset, zero-decay
/// image of the same input, reduced over the cavity.
inline TimingOffsetResult timing_offset_stage(const StateVector& reg,
                                              const std::pair<std::string, std::string>& atoms,
                                              const StageConfig& cfg, double offset_fraction,
                                              const std::string& early_atom) {
  cfg.validate();
  detail::check_stage_register(reg, atoms);
  if (!(offset_fraction >= 0.0 && offset_fraction < 1.0))
    throw std::invalid_argument("timing offset: offset_fraction must lie in [0, 1)");
  if (early_atom != atoms.first && early_atom != atoms.second)
    throw std::invalid_argument("timing offset: early atom must be one of the stage pair");
  const bool early_is_first = early_atom == atoms.first;
  const std::string late_atom = early_is_first ? atoms.second : atoms.first;
  const double g_early = early_is_first ? cfg.g1 : cfg.g2;
  const double g_late = early_is_first ? cfg.g2 : cfg.g1;
  // Solo passes map pair labels onto the fixed stage layout slots.
  auto solo = [&](const std::string& atom, double g) {
    const std::string slot = atom == atoms.first ? "atom1" : "atom2";
    return detail::cavity_pass_hamiltonian(cfg.n_max, cfg.kappa, cfg.tau, {{slot, g}}, true);
  };
  const Complex mi(0.0, -1.0);
  const Matrix u_early =
      matrix_exponential(mi * (offset_fraction * cfg.t) * solo(early_atom, g_early).matrix);
  const Matrix u_both =
      matrix_exponential(mi * ((1.0 - offset_fraction) * cfg.t) * stage_hamiltonian(cfg, true).matrix);
  const Matrix u_late =
      matrix_exponential(mi * (offset_fraction * cfg.t) * solo(late_atom, g_late).matrix);
  auto pass = detail::run_pass(reg, atoms, cfg, {u_early, u_both, u_late});

  // Ideal stage image of the same input, normalized, as the fidelity target.
  StageConfig ideal = cfg;
  ideal.g1 = cfg.g1;
  ideal.g2 = kCanonicalG2Ratio * cfg.g1;
  ideal.t = kPi / cfg.g1;
  ideal.kappa = 0.0;
  ideal.tau = 0.0;
  const StateVector target = run_stage(reg, atoms, ideal).state.normalized();
  double num = 0.0;
  for (int n = 0; n <= cfg.n_max; ++n) {
    StateVector slice = pass.with_cavity.project_factor(kCavityLabel, n);
    num += std::norm(overlap(target, slice));
  }
  const double fid = pass.norm2_after > 0.0 ? num / pass.norm2_after : 0.0;

  auto [projected, leakage] = detail::detach_cavity(pass);
  return {std::move(projected), pass.survival, leakage, fid};
}

// ---------------------------------------------------------------------------
// Cavity geometry and scalar error-budget formulas.

/// Gaussian cavity-mode geometry. Lengths share one unit; the wavevector
/// and the mode parameter z0 = pi w^2 / lambda are derived, so
/// wavevector() * wavelength == 2 pi to round-off. Keeping half_length at
/// or below 0.5 * rayleigh_parameter() holds the coupling-ratio condition
/// through the atoms' transit; no finer cavity-length error model is
/// attempted here.
struct GeometryConfig {
  double peak_coupling;  // Omega, coupling at the cavity center
  double waist;          // w
  double wavelength;     // lambda
  double spread;         // atomic wavefunction spread a
  double half_length;    // z, half the cavity length

  GeometryConfig(double omega, double w, double lambda, double a, double z)
      : peak_coupling(omega), waist(w), wavelength(lambda), spread(a), half_length(z) {
    if (!(omega > 0.0) || !(w > 0.0) || !(lambda > 0.0) || !(a > 0.0) || !(z > 0.0))
      throw std::invalid_argument("geometry: all parameters must be > 0");
  }

  double wavevector() const { return 2.0 * kPi / wavelength; }
  double rayleigh_parameter() const { return kPi * waist * waist / wavelength; }
};

/// g(r) = Omega exp(-r^2 / w^2) for an atom a distance r from the axis.
inline double coupling_at_position(const GeometryConfig& geom, double r) {
  if (r < 0.0) throw std::invalid_argument("geometry: r must be >= 0");
  return geom.peak_coupling * std::exp(-(r * r) / (geom.waist * geom.waist));
}

/// Inverse of coupling_at_position: the radius where g/Omega equals
/// `ratio`. ratio = 1/sqrt3 places the second atom for g2 = sqrt3 g1 when
/// the first sits at the center.
inline double position_for_coupling_ratio(const GeometryConfig& geom, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0)
    throw std::domain_error("geometry: coupling ratio must lie in (0, 1]");
  return geom.waist * std::sqrt(std::log(1.0 / ratio));
}

/// Lamb-Dicke infidelity Delta = (k a)^2 pi from the spatial spread of the
/// atomic wavefunction. (Delta = 0.01 corresponds to a = lambda
/// sqrt(0.01/pi) / (2 pi), commonly quoted rounded up to 0.01 lambda.)
inline double lamb_dicke_infidelity(double wavevector, double spread) {
  if (!(wavevector > 0.0) || !(spread > 0.0))
    throw std::invalid_argument("lamb-dicke: wavevector and spread must be > 0");
  const double ka = wavevector * spread;
  return ka * ka * kPi;
}

}  // namespace clustersim
