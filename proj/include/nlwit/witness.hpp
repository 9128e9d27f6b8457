// Copyright 2026 The nlwit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlwit/operator.hpp"

namespace nlwit {

/// One locally measurable term c_i * A_i ⊗ B_i of a witness decomposition.
struct WitnessTerm {
  double coeff = 0.0;
  Operator a;   // observable on H_A
  Operator b;   // observable on H_B
  std::string label;  // optional, e.g. the Pauli strings it was built from
};

/// Witness as a sum of locally measurable observables,
/// W = sum_i c_i A_i ⊗ B_i. The terms also fix the accessible subspace
/// V = span{A_i ⊗ B_i}.
struct LocalDecomposition {
  int dA = 0, dB = 0;
  std::vector<WitnessTerm> terms;

  void validate() const {
    if (dA < 2 || dB < 2) throw std::invalid_argument("LocalDecomposition: dims must be >= 2");
    if (terms.empty()) throw std::invalid_argument("LocalDecomposition: needs at least one term");
    for (size_t i = 0; i < terms.size(); ++i) {
      const auto& t = terms[i];
      if (t.a.dim() != dA || t.b.dim() != dB)
        throw std::invalid_argument("LocalDecomposition: term " + std::to_string(i) + " has mismatched dims");
      if (!is_hermitian(t.a.mat) || !is_hermitian(t.b.mat))
        throw std::invalid_argument("LocalDecomposition: term " + std::to_string(i) + " observable is not Hermitian");
    }
  }

  size_t size() const { return terms.size(); }

  Operator observable(size_t i) const {
    Operator o = tensor(terms[i].a, terms[i].b);
    return Operator(std::move(o.mat), {dA, dB});
  }
};

/// W = sum_i c_i A_i ⊗ B_i as a dense operator on H_AB.
inline Operator assemble(const LocalDecomposition& d) {
  d.validate();
  Mat w = Mat::Zero(static_cast<long>(d.dA) * d.dB, static_cast<long>(d.dA) * d.dB);
  for (size_t i = 0; i < d.terms.size(); ++i) w += d.terms[i].coeff * d.observable(i).mat;
  return Operator(std::move(w), {d.dA, d.dB});
}

/// The point M(rho) in R^N: one expectation value per decomposition term.
/// This is all the data the restricted evaluation path may touch.
struct ExpectationVector {
  enum class Provenance { exact, simulated };
  std::vector<double> values;
  Provenance provenance = Provenance::exact;
};

inline ExpectationVector expectation_vector(const DensityMatrix& rho, const LocalDecomposition& d) {
  d.validate();
  if (rho.dim() != static_cast<long>(d.dA) * d.dB)
    throw std::invalid_argument("expectation_vector: state dimension does not match decomposition");
  ExpectationVector v;
  v.values.reserve(d.size());
  for (size_t i = 0; i < d.size(); ++i) v.values.push_back(expectation(rho, d.observable(i).mat));
  return v;
}

/// sum_i c_i v_i; equals Tr(rho W) when v is exact.
inline double linear_witness_value(const ExpectationVector& v, const LocalDecomposition& d) {
  if (v.values.size() != d.size())
    throw std::invalid_argument("linear_witness_value: expectation vector length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < d.size(); ++i) acc += d.terms[i].coeff * v.values[i];
  return acc;
}

/// Orthonormal (Hilbert–Schmidt) operator basis of V = span{A_i ⊗ B_i},
/// built by modified Gram–Schmidt in term order so the basis is
/// deterministic. `term_coeffs` row k expands E_k over the input terms,
/// which is what lets the restricted path turn a measured M(rho) into
/// expectation values of anything in V.
struct SpanBasis {
  long op_dim = 0;
  std::vector<Operator> ops;          // orthonormal E_k
  Mat vecs;                           // op_dim^2 x k, vectorized E_k
  Mat term_coeffs;                    // k x N with E_k = sum_i term_coeffs(k,i) T_i
  std::vector<int> op_dims;

  int dim() const { return static_cast<int>(ops.size()); }

  /// Tr(rho E_k) for each k, given only the measured expectations v.
  Vec basis_expectations(const ExpectationVector& v) const {
    if (static_cast<long>(v.values.size()) != term_coeffs.cols())
      throw std::invalid_argument("SpanBasis: expectation vector length mismatch");
    Vec raw(term_coeffs.cols());
    for (long i = 0; i < raw.size(); ++i) raw(i) = v.values[i];
    return term_coeffs * raw;
  }
};

inline SpanBasis span_basis(const LocalDecomposition& d) {
  d.validate();
  const long D = static_cast<long>(d.dA) * d.dB;
  const long n = static_cast<long>(d.size());
  SpanBasis basis;
  basis.op_dim = D;
  basis.op_dims = {d.dA, d.dB};

  Mat kept(D * D, n);
  Mat coeffs(n, n);
  long k = 0;
  const double drop_tol = 1e-10;
  for (long i = 0; i < n; ++i) {
    Operator t = d.observable(static_cast<size_t>(i));
    Vec v = Eigen::Map<const Vec>(t.mat.data(), D * D);
    Vec c = Vec::Zero(n);
    c(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {  // MGS with one re-orthogonalization pass
      for (long j = 0; j < k; ++j) {
        const cplx alpha = kept.col(j).adjoint() * v;
        v -= alpha * kept.col(j);
        c -= alpha * coeffs.row(j).transpose();
      }
    }
    const double nrm = v.norm();
    if (nrm <= drop_tol * std::max(1.0, t.mat.norm())) continue;  // dependent term
    kept.col(k) = v / nrm;
    coeffs.row(k) = (c / nrm).transpose();
    ++k;
  }

  basis.vecs = kept.leftCols(k);
  basis.term_coeffs = coeffs.topRows(k);
  basis.ops.reserve(static_cast<size_t>(k));
  for (long j = 0; j < k; ++j)
    basis.ops.emplace_back(Eigen::Map<const Mat>(basis.vecs.col(j).data(), D, D), basis.op_dims);
  return basis;
}

/// Orthonormal basis of an arbitrary operator list (same mechanics as
/// span_basis, used for V' and test scaffolding).
inline SpanBasis span_of_operators(const std::vector<Operator>& ops) {
  if (ops.empty()) throw std::invalid_argument("span_of_operators: empty list");
  const long D = ops[0].dim();
  SpanBasis basis;
  basis.op_dim = D;
  basis.op_dims = ops[0].dims;
  const long n = static_cast<long>(ops.size());
  Mat kept(D * D, n);
  Mat coeffs(n, n);
  long k = 0;
  for (long i = 0; i < n; ++i) {
    if (ops[static_cast<size_t>(i)].dim() != D)
      throw std::invalid_argument("span_of_operators: inconsistent dimensions");
    Vec v = Eigen::Map<const Vec>(ops[static_cast<size_t>(i)].mat.data(), D * D);
    Vec c = Vec::Zero(n);
    c(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (long j = 0; j < k; ++j) {
        const cplx alpha = kept.col(j).adjoint() * v;
        v -= alpha * kept.col(j);
        c -= alpha * coeffs.row(j).transpose();
      }
    }
    const double nrm = v.norm();
    if (nrm <= 1e-10 * std::max(1.0, ops[static_cast<size_t>(i)].mat.norm())) continue;
    kept.col(k) = v / nrm;
    coeffs.row(k) = (c / nrm).transpose();
    ++k;
  }
  basis.vecs = kept.leftCols(k);
  basis.term_coeffs = coeffs.topRows(k);
  basis.ops.reserve(static_cast<size_t>(k));
  for (long j = 0; j < k; ++j)
    basis.ops.emplace_back(Eigen::Map<const Mat>(basis.vecs.col(j).data(), D, D), basis.op_dims);
  return basis;
}

/// Result of projecting an operator onto a span. `residual` is the
/// Hilbert–Schmidt norm of the part outside the span; membership holds when
/// it is below the tolerance. Not being in the span is a result, not an
/// error.
struct SpanExpansion {
  bool in_span = false;
  Vec coeffs;        // on the orthonormal basis
  double residual = 0.0;
};

inline SpanExpansion project_onto(const Mat& x, const SpanBasis& basis, double tolerance = tol::span) {
  if (x.rows() != basis.op_dim || x.cols() != basis.op_dim)
    throw std::invalid_argument("in_span: operator dimension does not match basis");
  SpanExpansion e;
  Vec v = Eigen::Map<const Vec>(x.data(), x.rows() * x.cols());
  e.coeffs = basis.vecs.adjoint() * v;
  e.residual = (v - basis.vecs * e.coeffs).norm();
  e.in_span = e.residual < tolerance;
  return e;
}

inline SpanExpansion in_span(const Operator& x, const SpanBasis& basis, double tolerance = tol::span) {
  return project_onto(x.mat, basis, tolerance);
}

/// Tr(rho T) for an operator T in V, evaluated from measured expectations
/// only. Returns nothing when T is outside the span at the given tolerance.
inline std::optional<cplx> restricted_expectation(const Mat& t, const SpanBasis& basis,
                                                  const ExpectationVector& v, double tolerance = tol::span) {
  SpanExpansion e = project_onto(t, basis, tolerance);
  if (!e.in_span) return std::nullopt;
  const Vec ek = basis.basis_expectations(v);
  cplx acc = 0.0;
  for (long k = 0; k < ek.size(); ++k) acc += e.coeffs(k) * ek(k);
  return acc;
}

}  // namespace nlwit
