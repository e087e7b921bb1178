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
// Sparse bosonic Fock states over the dual-rail collective modes (h_i, v_i)
// of atomic ensembles. The collective modes are treated as ideal bosonic
// modes (the 1/sqrt(N_a) normalization and N_a >> 1 limit taken exactly).

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clustersim/core_linalg.hpp"

namespace clustersim {

enum class Rail : std::uint8_t { h = 0, v = 1 };

inline char rail_char(Rail r) { return r == Rail::h ? 'h' : 'v'; }

/// One collective mode: rail h or v of a 1-based ensemble index.
struct ModeId {
  int ensemble = 1;
  Rail rail = Rail::h;

  ModeId(int ens, Rail r) : ensemble(ens), rail(r) {
    if (ens < 1) throw std::invalid_argument("mode: ensemble index must be >= 1");
  }

  auto operator<=>(const ModeId&) const = default;
};

inline ModeId mode_h(int ensemble) { return ModeId(ensemble, Rail::h); }
inline ModeId mode_v(int ensemble) { return ModeId(ensemble, Rail::v); }

/// Occupation-number tuple over ensemble modes; modes absent from the map
/// hold zero excitations. Canonical (sorted, zero-free) so it can key a map.
class OccupationState {
 public:
  OccupationState() = default;

  static OccupationState vacuum() { return OccupationState(); }

  int occupation(ModeId m) const {
    for (const auto& [mode, n] : modes_)
      if (mode == m) return n;
    return 0;
  }

  int ensemble_total(int ensemble) const {
    int t = 0;
    for (const auto& [mode, n] : modes_)
      if (mode.ensemble == ensemble) t += n;
    return t;
  }

  int total() const {
    int t = 0;
    for (const auto& [mode, n] : modes_) t += n;
    return t;
  }

  OccupationState with(ModeId m, int count) const {
    if (count < 0) throw std::invalid_argument("occupation: negative count");
    OccupationState out;
    bool placed = false;
    for (const auto& entry : modes_) {
      if (entry.first == m) {
        if (count > 0) out.modes_.push_back({m, count});
        placed = true;
      } else {
        out.modes_.push_back(entry);
      }
    }
    if (!placed && count > 0) {
      auto it = out.modes_.begin();
      while (it != out.modes_.end() && it->first < m) ++it;
      out.modes_.insert(it, {m, count});
    }
    return out;
  }

  const std::vector<std::pair<ModeId, int>>& modes() const { return modes_; }

  std::string to_string() const {
    if (modes_.empty()) return "|vac>";
    std::string s = "|";
    bool first = true;
    for (const auto& [mode, n] : modes_) {
      if (!first) s += ' ';
      first = false;
      if (n != 1) s += std::to_string(n) + '*';
      s += rail_char(mode.rail) + std::to_string(mode.ensemble);
    }
    return s + ">";
  }

  auto operator<=>(const OccupationState&) const = default;

 private:
  std::vector<std::pair<ModeId, int>> modes_;  // sorted by mode, counts > 0
};

/// Superposition over occupation-number tuples. Amplitudes below 1e-15 in
/// magnitude are pruned. The squared norm is not forced to 1: post-selection
/// shrinks it to the branch probability.
class SparseFockState {
 public:
  static constexpr double kPruneTol = 1e-15;
  static constexpr int kDefaultOccupationCap = 2;  // per ensemble, h+v total

  explicit SparseFockState(int n_ensembles, int occupation_cap = kDefaultOccupationCap)
      : n_ensembles_(n_ensembles), cap_(occupation_cap) {
    if (n_ensembles < 1) throw std::invalid_argument("fock: need at least one ensemble");
    if (occupation_cap < 1) throw std::invalid_argument("fock: occupation cap must be >= 1");
  }

  static SparseFockState vac(int n_ensembles, int occupation_cap = kDefaultOccupationCap) {
    SparseFockState s(n_ensembles, occupation_cap);
    s.terms_[OccupationState::vacuum()] = 1.0;
    return s;
  }

  int n_ensembles() const { return n_ensembles_; }
  int occupation_cap() const { return cap_; }
  const std::map<OccupationState, Complex>& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Complex amplitude(const OccupationState& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex(0.0) : it->second;
  }

  void accumulate(const OccupationState& occ, Complex amp) {
    check_occupation(occ);
    auto [it, inserted] = terms_.try_emplace(occ, amp);
    if (!inserted) it->second += amp;
    if (std::abs(it->second) < kPruneTol) terms_.erase(it);
  }

  double norm2() const {
    double n = 0.0;
    for (const auto& [occ, amp] : terms_) n += std::norm(amp);
    return n;
  }

  SparseFockState scaled(Complex c) const {
    SparseFockState out(n_ensembles_, cap_);
    if (std::abs(c) < kPruneTol) return out;
    for (const auto& [occ, amp] : terms_) out.terms_[occ] = amp * c;
    return out;
  }

  SparseFockState normalized() const {
    const double n2 = norm2();
    if (n2 <= 0.0) throw std::domain_error("fock: cannot normalize the zero state");
    return scaled(1.0 / std::sqrt(n2));
  }

  SparseFockState plus(const SparseFockState& o) const {
    require_compatible(o);
    SparseFockState out = *this;
    for (const auto& [occ, amp] : o.terms_) out.accumulate(occ, amp);
    return out;
  }

  /// Capacity grows; existing terms are untouched.
  SparseFockState extended(int new_n_ensembles) const {
    if (new_n_ensembles < n_ensembles_)
      throw std::invalid_argument("fock: cannot shrink ensemble capacity");
    SparseFockState out(new_n_ensembles, cap_);
    out.terms_ = terms_;
    return out;
  }

  void require_compatible(const SparseFockState& o) const {
    if (n_ensembles_ != o.n_ensembles_)
      throw std::invalid_argument("fock: ensemble counts differ");
  }

 private:
  void check_occupation(const OccupationState& occ) const {
    for (const auto& [mode, n] : occ.modes()) {
      if (mode.ensemble > n_ensembles_)
        throw std::invalid_argument("fock: mode beyond ensemble capacity");
      (void)n;
    }
    for (const auto& [mode, n] : occ.modes()) {
      (void)n;
      if (occ.ensemble_total(mode.ensemble) > cap_)
        throw std::overflow_error("fock: per-ensemble occupation cap exceeded");
    }
  }

  std::map<OccupationState, Complex> terms_;
  int n_ensembles_;
  int cap_;
};

inline Complex overlap(const SparseFockState& a, const SparseFockState& b) {
  a.require_compatible(b);
  Complex s = 0.0;
  for (const auto& [occ, amp] : a.terms()) s += std::conj(amp) * b.amplitude(occ);
  return s;
}

inline double fidelity_pure(const SparseFockState& a, const SparseFockState& b) {
  const double na = a.norm2(), nb = b.norm2();
  if (na <= 0.0 || nb <= 0.0) throw std::domain_error("fidelity: zero state");
  return std::norm(overlap(a, b)) / (na * nb);
}

/// Bosonic creation operator on one mode: |n> -> sqrt(n+1) |n+1>.
inline SparseFockState create(const SparseFockState& s, ModeId m) {
  SparseFockState out(s.n_ensembles(), s.occupation_cap());
  for (const auto& [occ, amp] : s.terms()) {
    const int n = occ.occupation(m);
    out.accumulate(occ.with(m, n + 1), amp * std::sqrt(double(n + 1)));
  }
  return out;
}

/// Product of the creation-operator polynomials behind the two states.
/// Modes occupied by both parts combine with the bosonic factor
/// sqrt(C(p+n, n)) from stacking (a+)^p and (a+)^n.
inline SparseFockState tensor(const SparseFockState& a, const SparseFockState& b) {
  a.require_compatible(b);
  SparseFockState out(a.n_ensembles(), a.occupation_cap());
  for (const auto& [oa, aa] : a.terms()) {
    for (const auto& [ob, ab] : b.terms()) {
      OccupationState merged = oa;
      double boson = 1.0;
      for (const auto& [mode, n] : ob.modes()) {
        const int prior = merged.occupation(mode);
        if (prior > 0) {
          double c = 1.0;
          for (int k = 1; k <= n; ++k) c *= double(prior + k) / double(k);
          boson *= std::sqrt(c);
        }
        merged = merged.with(mode, prior + n);
      }
      out.accumulate(merged, aa * ab * boson);
    }
  }
  return out;
}

/// Linear substitution on the creation operators of one ensemble:
///   h+ -> u(0,0) h+ + u(1,0) v+ ,  v+ -> u(0,1) h+ + u(1,1) v+ .
/// Multi-photon terms expand binomially with bosonic normalization.
inline SparseFockState apply_mode_unitary(const SparseFockState& s, int ensemble,
                                          const Eigen::Matrix2cd& u) {
  if (ensemble < 1 || ensemble > s.n_ensembles())
    throw std::invalid_argument("mode unitary: ensemble out of range");
  auto fact = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  SparseFockState out(s.n_ensembles(), s.occupation_cap());
  for (const auto& [occ, amp] : s.terms()) {
    const int m = occ.occupation(mode_h(ensemble));
    const int n = occ.occupation(mode_v(ensemble));
    OccupationState rest = occ.with(mode_h(ensemble), 0).with(mode_v(ensemble), 0);
    // coefficients of (h+)^ph (v+)^pv after substitution
    std::map<std::pair<int, int>, Complex> poly;
    poly[{0, 0}] = amp / std::sqrt(fact(m) * fact(n));
    for (int rep = 0; rep < m + n; ++rep) {
      const Complex ch = rep < m ? u(0, 0) : u(0, 1);
      const Complex cv = rep < m ? u(1, 0) : u(1, 1);
      std::map<std::pair<int, int>, Complex> next;
      for (const auto& [pw, c] : poly) {
        next[{pw.first + 1, pw.second}] += c * ch;
        next[{pw.first, pw.second + 1}] += c * cv;
      }
      poly = std::move(next);
    }
    for (const auto& [pw, c] : poly) {
      const auto [ph, pv] = pw;
      Complex c2 = c * std::sqrt(fact(ph) * fact(pv));
      if (std::abs(c2) < SparseFockState::kPruneTol) continue;
      out.accumulate(rest.with(mode_h(ensemble), ph).with(mode_v(ensemble), pv), c2);
    }
  }
  return out;
}

/// Beam-splitter-style rotation of the (h, v) mode pair:
///   h+ -> cos(t) h+ + e^{i phi} sin(t) v+ ,
///   v+ -> -e^{-i phi} sin(t) h+ + cos(t) v+ .
inline SparseFockState mode_rotation(const SparseFockState& s, int ensemble, double theta,
                                     double phi) {
  Eigen::Matrix2cd u;
  const Complex eip = std::polar(1.0, phi);
  u << std::cos(theta), -std::conj(eip) * std::sin(theta),
       eip * std::sin(theta), std::cos(theta);
  return apply_mode_unitary(s, ensemble, u);
}

/// Exact rail swap h+ <-> v+ (a Pauli X on the dual-rail qubit).
inline SparseFockState swap_rails(const SparseFockState& s, int ensemble) {
  Eigen::Matrix2cd u;
  u << 0, 1, 1, 0;
  return apply_mode_unitary(s, ensemble, u);
}

/// Phase on one rail: terms gain phase^count for that mode's occupation.
inline SparseFockState rail_phase(const SparseFockState& s, int ensemble, Rail rail,
                                  Complex phase) {
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (rail == Rail::h) u(0, 0) = phase; else u(1, 1) = phase;
  return apply_mode_unitary(s, ensemble, u);
}

/// Dual-rail Hadamard: h+ -> (h+ + v+)/sqrt2 , v+ -> (h+ - v+)/sqrt2.
inline SparseFockState hadamard(const SparseFockState& s, int ensemble) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  u << r, r, r, -r;
  return apply_mode_unitary(s, ensemble, u);
}

/// Renames ensemble `from` to (unoccupied) ensemble `to` in every term.
inline SparseFockState relabel_ensemble(const SparseFockState& s, int from, int to) {
  if (from == to) return s;
  SparseFockState out(s.n_ensembles(), s.occupation_cap());
  for (const auto& [occ, amp] : s.terms()) {
    if (occ.ensemble_total(to) != 0)
      throw std::invalid_argument("relabel: destination ensemble occupied");
    OccupationState moved = occ;
    for (Rail r : {Rail::h, Rail::v}) {
      const int n = moved.occupation(ModeId(from, r));
      if (n > 0) moved = moved.with(ModeId(from, r), 0).with(ModeId(to, r), n);
    }
    out.accumulate(moved, amp);
  }
  return out;
}

}  // namespace clustersim
