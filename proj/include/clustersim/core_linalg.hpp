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
// Complex linear-algebra substrate: labeled tensor-product spaces, dense
// state vectors and operators, operator embedding, and matrix-exponential
// time evolution. All values are immutable after construction and every
// operation is a pure function, so they are safe to call from parallel
// sweep drivers.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace clustersim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// One tensor factor of a product space.
struct Factor {
  std::string label;
  int dim = 0;
};

/// Ordered list of labeled tensor factors. The flat basis index of a
/// product state is row-major over the factors: the first factor is the
/// most significant digit, matching the Kronecker-product convention.
class SubsystemLayout {
 public:
  SubsystemLayout() = default;

  explicit SubsystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    for (const auto& f : factors_) {
      if (f.dim < 1) throw std::invalid_argument("layout: factor dimension must be >= 1");
      if (f.label.empty()) throw std::invalid_argument("layout: empty factor label");
    }
    for (std::size_t a = 0; a < factors_.size(); ++a)
      for (std::size_t b = a + 1; b < factors_.size(); ++b)
        if (factors_[a].label == factors_[b].label)
          throw std::invalid_argument("layout: duplicate factor label '" + factors_[a].label + "'");
    strides_.assign(factors_.size(), 1);
    for (int k = static_cast<int>(factors_.size()) - 2; k >= 0; --k)
      strides_[k] = strides_[k + 1] * factors_[k + 1].dim;
  }

  int factor_count() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int k) const { return factors_.at(k); }
  const std::vector<Factor>& factors() const { return factors_; }

  /// Stride of factor k in the flat amplitude index.
  long stride(int k) const { return strides_.at(k); }

  long total_dimension() const {
    long d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }

  bool has(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(),
                       [&](const Factor& f) { return f.label == label; });
  }

  int index_of(const std::string& label) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label == label) return static_cast<int>(k);
    throw std::invalid_argument("layout: unknown factor label '" + label + "'");
  }

  bool operator==(const SubsystemLayout& o) const {
    if (factors_.size() != o.factors_.size()) return false;
    for (std::size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label != o.factors_[k].label || factors_[k].dim != o.factors_[k].dim)
        return false;
    return true;
  }
  bool operator!=(const SubsystemLayout& o) const { return !(*this == o); }

 private:
  std::vector<Factor> factors_;
  std::vector<long> strides_;
};

/// Dense complex amplitude vector over a labeled product space. The squared
/// norm is not forced to 1: under conditional (no-jump) evolution it carries
/// the survival probability of the branch.
class StateVector {
 public:
  StateVector(SubsystemLayout layout, Vector amplitudes)
      : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
    if (amps_.size() != layout_.total_dimension())
      throw std::invalid_argument("state: amplitude count does not match layout dimension");
  }

  static StateVector zero(SubsystemLayout layout) {
    Vector v = Vector::Zero(layout.total_dimension());
    return StateVector(std::move(layout), std::move(v));
  }

  /// Basis state |i0 i1 ...> with one index per factor.
  static StateVector basis(SubsystemLayout layout, const std::vector<int>& indices) {
    if (static_cast<int>(indices.size()) != layout.factor_count())
      throw std::invalid_argument("state: one basis index per factor required");
    long flat = 0;
    for (int k = 0; k < layout.factor_count(); ++k) {
      if (indices[k] < 0 || indices[k] >= layout.factor(k).dim)
        throw std::invalid_argument("state: basis index out of range");
      flat += indices[k] * layout.stride(k);
    }
    StateVector s = zero(std::move(layout));
    s.amps_[flat] = 1.0;
    return s;
  }

  const SubsystemLayout& layout() const { return layout_; }
  const Vector& amplitudes() const { return amps_; }
  Complex amplitude(long flat) const { return amps_(flat); }
  long dimension() const { return amps_.size(); }

  double norm2() const { return amps_.squaredNorm(); }

  StateVector scaled(Complex c) const { return StateVector(layout_, amps_ * c); }

  StateVector normalized() const {
    double n2 = norm2();
    if (n2 <= 0.0) throw std::domain_error("state: cannot normalize the zero vector");
    return scaled(1.0 / std::sqrt(n2));
  }

  /// Probability mass of factor `label` sitting in basis index `idx`.
  double factor_population(const std::string& label, int idx) const {
    const int k = layout_.index_of(label);
    const long stride = layout_.stride(k);
    const int dim = layout_.factor(k).dim;
    if (idx < 0 || idx >= dim) throw std::invalid_argument("state: factor index out of range");
    double mass = 0.0;
    const long dtot = dimension();
    for (long base = 0; base < dtot; base += stride * dim)
      for (long rest = 0; rest < stride; ++rest)
        mass += std::norm(amps_(base + idx * stride + rest));
    return mass;
  }

  /// Projects factor `label` onto basis index `idx` and removes the factor.
  /// The result is unnormalized: its squared norm is the projected mass.
  StateVector project_factor(const std::string& label, int idx) const {
    const int k = layout_.index_of(label);
    const long stride = layout_.stride(k);
    const int dim = layout_.factor(k).dim;
    if (idx < 0 || idx >= dim) throw std::invalid_argument("state: factor index out of range");
    std::vector<Factor> rest;
    for (int j = 0; j < layout_.factor_count(); ++j)
      if (j != k) rest.push_back(layout_.factor(j));
    SubsystemLayout rl(rest);
    Vector out = Vector::Zero(rl.total_dimension());
    long w = 0;
    const long dtot = dimension();
    for (long base = 0; base < dtot; base += stride * dim)
      for (long r = 0; r < stride; ++r) out(w++) = amps_(base + idx * stride + r);
    return StateVector(std::move(rl), std::move(out));
  }

 private:
  SubsystemLayout layout_;
  Vector amps_;
};

/// Kronecker product of the given states in listed order; layouts are
/// concatenated. Duplicate labels across parts are rejected.
inline StateVector tensor(const std::vector<StateVector>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor: no parts");
  std::vector<Factor> factors;
  long dim = 1;
  for (const auto& p : parts) {
    for (const auto& f : p.layout().factors()) factors.push_back(f);
    dim *= p.dimension();
  }
  SubsystemLayout layout(factors);  // throws on duplicate labels
  Vector out(dim);
  out(0) = 1.0;
  long filled = 1;
  for (const auto& p : parts) {
    const long pd = p.dimension();
    for (long a = filled - 1; a >= 0; --a) {
      const Complex base = out(a);
      for (long b = pd - 1; b >= 0; --b) out(a * pd + b) = base * p.amplitude(b);
    }
    filled *= pd;
  }
  return StateVector(std::move(layout), std::move(out));
}

inline Complex overlap(const StateVector& a, const StateVector& b) {
  if (a.layout() != b.layout()) throw std::invalid_argument("overlap: layouts differ");
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left side
}

/// |<a|b>|^2 / (|a|^2 |b|^2): fidelity of the normalized pure states.
inline double fidelity_pure(const StateVector& a, const StateVector& b) {
  const double na = a.norm2(), nb = b.norm2();
  if (na <= 0.0 || nb <= 0.0) throw std::domain_error("fidelity: zero vector");
  return std::norm(overlap(a, b)) / (na * nb);
}

/// Dense operator on a labeled product space; may be non-Hermitian.
struct Operator {
  SubsystemLayout layout;
  Matrix matrix;

  Operator(SubsystemLayout l, Matrix m) : layout(std::move(l)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != layout.total_dimension())
      throw std::invalid_argument("operator: matrix does not match layout dimension");
  }

  static Operator identity(SubsystemLayout l) {
    long d = l.total_dimension();
    return Operator(std::move(l), Matrix::Identity(d, d));
  }
};

namespace detail {

// Strides and dims needed to walk a subset of factors of a layout.
struct AxisPlan {
  std::vector<long> target_strides;  // per target factor, in the given order
  std::vector<int> target_dims;
  std::vector<long> rest_strides;
  std::vector<int> rest_dims;
  long target_dim = 1;
  long rest_dim = 1;
};

inline AxisPlan make_axis_plan(const SubsystemLayout& layout,
                               const std::vector<std::string>& target_labels) {
  AxisPlan plan;
  std::vector<int> target_pos;
  for (const auto& lbl : target_labels) target_pos.push_back(layout.index_of(lbl));
  for (std::size_t a = 0; a < target_pos.size(); ++a)
    for (std::size_t b = a + 1; b < target_pos.size(); ++b)
      if (target_pos[a] == target_pos[b])
        throw std::invalid_argument("embed: repeated target label");
  for (int p : target_pos) {
    plan.target_strides.push_back(layout.stride(p));
    plan.target_dims.push_back(layout.factor(p).dim);
    plan.target_dim *= layout.factor(p).dim;
  }
  for (int k = 0; k < layout.factor_count(); ++k) {
    if (std::find(target_pos.begin(), target_pos.end(), k) != target_pos.end()) continue;
    plan.rest_strides.push_back(layout.stride(k));
    plan.rest_dims.push_back(layout.factor(k).dim);
    plan.rest_dim *= layout.factor(k).dim;
  }
  return plan;
}

// Flat offsets of every index combination of the (strides, dims) odometer.
inline std::vector<long> enumerate_offsets(const std::vector<long>& strides,
                                           const std::vector<int>& dims, long count) {
  std::vector<long> offsets(count, 0);
  long repeat = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    for (long i = 0; i < count; ++i) offsets[i] += ((i / repeat) % dims[k]) * strides[k];
    repeat *= dims[k];
  }
  return offsets;
}

}  // namespace detail

/// Lifts `op` to `layout`, acting on the factors named by `target_labels`
/// (in that order) and as the identity elsewhere.
inline Operator embed(const Operator& op, const std::vector<std::string>& target_labels,
                      const SubsystemLayout& layout) {
  if (static_cast<int>(target_labels.size()) != op.layout.factor_count())
    throw std::invalid_argument("embed: one target label per operator factor required");
  for (int k = 0; k < op.layout.factor_count(); ++k) {
    const auto& lbl = target_labels[k];
    if (layout.factor(layout.index_of(lbl)).dim != op.layout.factor(k).dim)
      throw std::invalid_argument("embed: factor dimension mismatch for label '" + lbl + "'");
  }
  auto plan = detail::make_axis_plan(layout, target_labels);
  const auto toff = detail::enumerate_offsets(plan.target_strides, plan.target_dims, plan.target_dim);
  const auto roff = detail::enumerate_offsets(plan.rest_strides, plan.rest_dims, plan.rest_dim);
  Matrix out = Matrix::Zero(layout.total_dimension(), layout.total_dimension());
  for (long r = 0; r < plan.rest_dim; ++r)
    for (long i = 0; i < plan.target_dim; ++i)
      for (long j = 0; j < plan.target_dim; ++j)
        out(roff[r] + toff[i], roff[r] + toff[j]) = op.matrix(i, j);
  return Operator(layout, std::move(out));
}

/// Applies a small matrix to the named factors of a state without forming
/// the embedded full-space operator. Equivalent to
/// apply(embed(op, targets, layout), state).
inline StateVector apply_to_factors(const Matrix& m, const std::vector<std::string>& target_labels,
                                    const StateVector& s) {
  auto plan = detail::make_axis_plan(s.layout(), target_labels);
  if (m.rows() != m.cols() || m.rows() != plan.target_dim)
    throw std::invalid_argument("apply: matrix does not match target dimensions");
  const auto toff = detail::enumerate_offsets(plan.target_strides, plan.target_dims, plan.target_dim);
  const auto roff = detail::enumerate_offsets(plan.rest_strides, plan.rest_dims, plan.rest_dim);
  Vector out = Vector::Zero(s.dimension());
  Vector block(plan.target_dim);
  for (long r = 0; r < plan.rest_dim; ++r) {
    for (long i = 0; i < plan.target_dim; ++i) block(i) = s.amplitude(roff[r] + toff[i]);
    Vector y = m * block;
    for (long i = 0; i < plan.target_dim; ++i) out(roff[r] + toff[i]) = y(i);
  }
  return StateVector(s.layout(), std::move(out));
}

inline StateVector apply(const Operator& op, const StateVector& s) {
  if (op.layout != s.layout()) throw std::invalid_argument("apply: layouts differ");
  return StateVector(s.layout(), op.matrix * s.amplitudes());
}

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant. Chosen over eigendecomposition because the conditional
/// Hamiltonians here are non-normal.
inline Matrix matrix_exponential(const Matrix& a) {
  if (!a.allFinite()) throw std::invalid_argument("expm: non-finite matrix entries");
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const long n = a.rows();
  const double nrm = a.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm
  int squarings = 0;
  Matrix as = a;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    as /= std::pow(2.0, squarings);
  }
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a2 * a4;
  const Matrix ident = Matrix::Identity(n, n);
  Matrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                   b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
             b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

/// exp(-i H t) applied to `state`, with no renormalization: for
/// non-Hermitian H the squared norm of the result is the survival
/// probability of the no-jump branch. The Pade evaluation targets full
/// double precision, which satisfies any requested tol >= 1e-13.
inline StateVector evolve(const StateVector& state, const Operator& h, double t,
                          double tol = 1e-12) {
  if (h.layout != state.layout()) throw std::invalid_argument("evolve: layouts differ");
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("evolve: time must be finite and >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("evolve: tolerance must be positive");
  if (!h.matrix.allFinite() || !state.amplitudes().allFinite())
    throw std::invalid_argument("evolve: non-finite entries");
  const Complex mi(0.0, -1.0);
  Matrix u = matrix_exponential(mi * t * h.matrix);
  return StateVector(state.layout(), u * state.amplitudes());
}

}  // namespace clustersim
