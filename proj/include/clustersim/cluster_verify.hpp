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
// Canonical linear-cluster-state targets, fidelity evaluation, and
// stabilizer-style structural checks, shared by the cavity-QED and
// atomic-ensemble pipelines.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "clustersim/core_linalg.hpp"
#include "clustersim/fock.hpp"

namespace clustersim {

/// How a physical register encodes a logical qubit.
/// atomic:    |g> -> 0, |e> -> 1 inside a three-level {g, e, i} atom;
///            residual |i> population counts as orthogonal loss.
/// dual_rail: one excitation shared between rails, h -> 0, v -> 1.
enum class QubitEncoding { atomic, dual_rail };

inline const char* encoding_name(QubitEncoding e) {
  return e == QubitEncoding::atomic ? "atomic" : "dual_rail";
}

namespace detail {

// Sign of the computational-basis amplitude of the linear cluster state
// (1/2^{N/2}) prod_j (|0>_j sz^{(j+1)} + |1>_j), with sz|0> = +|0>,
// sz|1> = -|1> and sz^{(N+1)} = 1. Each j with bit 0 applies sz to bit j+1.
inline int cluster_sign(const std::vector<int>& bits) {
  int sign = 1;
  for (std::size_t j = 0; j + 1 < bits.size(); ++j)
    if (bits[j] == 0 && bits[j + 1] == 1) sign = -sign;
  return sign;
}

inline std::vector<int> bits_of(long index, int n) {
  std::vector<int> bits(n);
  for (int j = n - 1; j >= 0; --j) {
    bits[j] = index & 1;
    index >>= 1;
  }
  return bits;
}

}  // namespace detail

/// N-qubit linear cluster state as a dense vector over qubits q1..qN:
/// 2^N nonzero amplitudes, all of magnitude 2^{-N/2}.
inline StateVector ideal_cluster_qubits(int n) {
  if (n < 1) throw std::invalid_argument("ideal_cluster: need n >= 1");
  std::vector<Factor> factors;
  for (int j = 1; j <= n; ++j) factors.push_back({"q" + std::to_string(j), 2});
  SubsystemLayout layout(factors);
  Vector amps(layout.total_dimension());
  const double mag = std::pow(2.0, -0.5 * n);
  for (long b = 0; b < amps.size(); ++b)
    amps(b) = mag * detail::cluster_sign(detail::bits_of(b, n));
  return StateVector(std::move(layout), std::move(amps));
}

/// Same target in the dual-rail image: occupation terms with one excitation
/// per ensemble, h for bit 0 and v for bit 1.
inline SparseFockState ideal_cluster_dual_rail(int n) {
  if (n < 1) throw std::invalid_argument("ideal_cluster: need n >= 1");
  SparseFockState out(n);
  const double mag = std::pow(2.0, -0.5 * n);
  for (long b = 0; b < (1L << n); ++b) {
    const auto bits = detail::bits_of(b, n);
    OccupationState occ;
    for (int j = 0; j < n; ++j)
      occ = occ.with(ModeId(j + 1, bits[j] ? Rail::v : Rail::h), 1);
    out.accumulate(occ, mag * detail::cluster_sign(bits));
  }
  return out;
}

/// Fidelity of a qubit-register candidate (factor dims all 2) or a
/// three-level atomic register (dims all 3, g/e carrying the qubit, any |i>
/// population orthogonal to the target) against the N-qubit cluster state.
inline double cluster_fidelity(const StateVector& candidate, int n) {
  const auto& layout = candidate.layout();
  if (layout.factor_count() != n)
    throw std::invalid_argument("cluster_fidelity: candidate has wrong qubit count");
  const int d = layout.factor(0).dim;
  if (d != 2 && d != 3)
    throw std::invalid_argument("cluster_fidelity: factor dimensions must be 2 or 3");
  for (int k = 0; k < n; ++k)
    if (layout.factor(k).dim != d)
      throw std::invalid_argument("cluster_fidelity: mixed factor dimensions");
  const double n2 = candidate.norm2();
  if (n2 <= 0.0) throw std::domain_error("cluster_fidelity: zero candidate");
  const double mag = std::pow(2.0, -0.5 * n);
  Complex ov = 0.0;
  for (long b = 0; b < (1L << n); ++b) {
    const auto bits = detail::bits_of(b, n);
    long flat = 0;
    for (int j = 0; j < n; ++j) flat += bits[j] * layout.stride(j);
    ov += mag * double(detail::cluster_sign(bits)) * candidate.amplitude(flat);
  }
  return std::norm(ov) / n2;
}

/// Dual-rail candidate against the cluster target; support outside the
/// one-excitation-per-ensemble subspace counts as loss.
inline double cluster_fidelity(const SparseFockState& candidate, int n) {
  const double n2 = candidate.norm2();
  if (n2 <= 0.0) throw std::domain_error("cluster_fidelity: zero candidate");
  SparseFockState ideal = ideal_cluster_dual_rail(n).extended(candidate.n_ensembles());
  return std::norm(overlap(ideal, candidate)) / n2;
}

namespace detail {

// Reduces a three-level atomic register to its {g, e} qubit block. Throws
// if more than `tol` of the population sits in |i> levels.
inline StateVector to_qubit_register(const StateVector& s, double tol = 1e-9) {
  const auto& layout = s.layout();
  const int n = layout.factor_count();
  for (int k = 0; k < n; ++k)
    if (layout.factor(k).dim != 3)
      throw std::invalid_argument("to_qubit_register: expected three-level factors");
  std::vector<Factor> qf;
  for (const auto& f : layout.factors()) qf.push_back({f.label, 2});
  SubsystemLayout ql(qf);
  Vector amps = Vector::Zero(ql.total_dimension());
  double kept = 0.0;
  for (long b = 0; b < (1L << n); ++b) {
    const auto bits = bits_of(b, n);
    long src = 0, dst = 0;
    for (int j = 0; j < n; ++j) {
      src += bits[j] * layout.stride(j);
      dst += bits[j] * ql.stride(j);
    }
    amps(dst) = s.amplitude(src);
    kept += std::norm(amps(dst));
  }
  const double total = s.norm2();
  if (total - kept > tol * total)
    throw std::invalid_argument("stabilizers: candidate has |i>-level support, not qubit-encoded");
  return StateVector(std::move(ql), std::move(amps));
}

}  // namespace detail

/// Expectations <K_j> of K_j = sz^{(j-1)} sx^{(j)} sz^{(j+1)} (out-of-range
/// factors dropped), evaluated on the normalized candidate. Accepts a plain
/// qubit register or a three-level atomic register with negligible |i>
/// support. The reference signs on the ideal state come from
/// stabilizer_reference_signs, not from an assumed convention.
inline std::vector<double> stabilizer_expectations(const StateVector& candidate, int n) {
  const auto& layout = candidate.layout();
  if (layout.factor_count() != n)
    throw std::invalid_argument("stabilizers: candidate has wrong qubit count");
  StateVector qs = layout.factor(0).dim == 3 ? detail::to_qubit_register(candidate)
                                             : candidate;
  if (qs.layout().factor(0).dim != 2)
    throw std::invalid_argument("stabilizers: non-qubit input");
  const double n2 = qs.norm2();
  if (n2 <= 0.0) throw std::domain_error("stabilizers: zero candidate");
  const auto& ql = qs.layout();
  std::vector<double> out;
  for (int j = 1; j <= n; ++j) {
    Complex acc = 0.0;
    const long dim = ql.total_dimension();
    for (long b = 0; b < dim; ++b) {
      const Complex amp = qs.amplitude(b);
      if (amp == Complex(0.0)) continue;
      int sign = 1;
      if (j - 2 >= 0 && ((b / ql.stride(j - 2)) & 1)) sign = -sign;  // sz on j-1
      if (j < n && ((b / ql.stride(j)) & 1)) sign = -sign;           // sz on j+1
      const long flipped = (b / ql.stride(j - 1)) & 1 ? b - ql.stride(j - 1)
                                                      : b + ql.stride(j - 1);
      acc += std::conj(qs.amplitude(flipped)) * (double(sign) * amp);
    }
    out.push_back(acc.real() / n2);
  }
  return out;
}

/// Brute-force reference signs s_j = <ideal|K_j|ideal>, each of magnitude 1.
inline std::vector<int> stabilizer_reference_signs(int n) {
  std::vector<int> signs;
  for (double e : stabilizer_expectations(ideal_cluster_qubits(n), n)) {
    if (std::abs(std::abs(e) - 1.0) > 1e-9)
      throw std::runtime_error("stabilizers: ideal state gave non-unit expectation");
    signs.push_back(e > 0 ? 1 : -1);
  }
  return signs;
}

}  // namespace clustersim
