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

#include <Eigen/Dense>

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlwit {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermitian = 1e-9;
inline constexpr double psd = 1e-9;
inline constexpr double span = 1e-9;
inline constexpr double unitary = 1e-9;
inline constexpr double divisor = 1e-12;   // guard on the kappa^-1 denominator
inline constexpr double d_zero = 1e-10;    // |d(rho)| threshold for divergence
}  // namespace tol

/// Dense operator on a tensor-product Hilbert space. `dims` lists the
/// subsystem dimensions in tensor order; their product is the matrix size.
struct Operator {
  Mat mat;
  std::vector<int> dims;

  Operator() = default;
  Operator(Mat m, std::vector<int> d) : mat(std::move(m)), dims(std::move(d)) {
    const long expected = total_dim(dims);
    if (mat.rows() != mat.cols() || mat.rows() != expected)
      throw std::invalid_argument("Operator: matrix size does not match subsystem dims");
    if (!mat.allFinite())
      throw std::invalid_argument("Operator: non-finite entries");
  }

  long dim() const { return mat.rows(); }

  static long total_dim(const std::vector<int>& dims) {
    long p = 1;
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("Operator: subsystem dim must be >= 1");
      p *= d;
    }
    return p;
  }
};

inline Operator identity_op(std::vector<int> dims) {
  const long d = Operator::total_dim(dims);
  return Operator(Mat::Identity(d, d), std::move(dims));
}

inline cplx hs_inner(const Mat& a, const Mat& b) { return (a.adjoint() * b).trace(); }
inline double hs_norm(const Mat& a) { return a.norm(); }

inline bool is_hermitian(const Mat& m, double eps = tol::hermitian) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

inline bool is_unitary(const Mat& u, double eps = tol::unitary) {
  if (u.rows() != u.cols()) return false;
  Mat g = u * u.adjoint();
  g -= Mat::Identity(u.rows(), u.cols());
  return g.cwiseAbs().maxCoeff() <= eps;
}

inline bool is_involution(const Mat& u, double eps = tol::unitary) {
  Mat g = u * u - Mat::Identity(u.rows(), u.cols());
  return g.cwiseAbs().maxCoeff() <= eps;
}

/// Kronecker product; result dims are the concatenation of the factors'.
inline Operator tensor(const Operator& a, const Operator& b) {
  const long ra = a.dim(), rb = b.dim();
  Mat out(ra * rb, ra * rb);
  for (long i = 0; i < ra; ++i)
    for (long j = 0; j < ra; ++j)
      out.block(i * rb, j * rb, rb, rb) = a.mat(i, j) * b.mat;
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  return Operator(std::move(out), std::move(dims));
}

namespace detail {

inline void check_subsystems(const Operator& x, const std::vector<int>& subsystems) {
  for (int s : subsystems)
    if (s < 0 || s >= static_cast<int>(x.dims.size()))
      throw std::invalid_argument("invalid subsystem index " + std::to_string(s));
}

// Row-major strides of the multi-index over dims (first factor most significant).
inline std::vector<long> strides(const std::vector<int>& dims) {
  std::vector<long> s(dims.size());
  long acc = 1;
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    s[i] = acc;
    acc *= dims[i];
  }
  return s;
}

}  // namespace detail

/// Traces out the named subsystems.
inline Operator partial_trace(const Operator& x, const std::vector<int>& subsystems) {
  detail::check_subsystems(x, subsystems);
  std::vector<bool> traced(x.dims.size(), false);
  for (int s : subsystems) traced[s] = true;

  std::vector<int> kept_dims;
  for (size_t i = 0; i < x.dims.size(); ++i)
    if (!traced[i]) kept_dims.push_back(x.dims[i]);
  if (kept_dims.empty()) kept_dims.push_back(1);

  const auto st = detail::strides(x.dims);
  long kept_total = 1, traced_total = 1;
  for (size_t i = 0; i < x.dims.size(); ++i)
    (traced[i] ? traced_total : kept_total) *= x.dims[i];

  // Enumerate kept and traced multi-indices separately and add the diagonal
  // traced blocks into the output.
  std::vector<int> kept_idx, traced_idx;
  for (size_t i = 0; i < x.dims.size(); ++i) (traced[i] ? traced_idx : kept_idx).push_back(static_cast<int>(i));

  auto offset_of = [&](const std::vector<int>& axes, long flat) {
    long off = 0;
    for (int i = static_cast<int>(axes.size()) - 1; i >= 0; --i) {
      const int ax = axes[i];
      off += (flat % x.dims[ax]) * st[ax];
      flat /= x.dims[ax];
    }
    return off;
  };

  Mat out = Mat::Zero(kept_total, kept_total);
  for (long t = 0; t < traced_total; ++t) {
    const long toff = offset_of(traced_idx, t);
    for (long r = 0; r < kept_total; ++r) {
      const long roff = offset_of(kept_idx, r);
      for (long c = 0; c < kept_total; ++c) {
        const long coff = offset_of(kept_idx, c);
        out(r, c) += x.mat(roff + toff, coff + toff);
      }
    }
  }
  return Operator(std::move(out), std::move(kept_dims));
}

/// Transposes the named subsystems in the computational basis. Exact entry
/// permutation, so applying it twice restores the input bit for bit.
inline Operator partial_transpose(const Operator& x, const std::vector<int>& subsystems) {
  detail::check_subsystems(x, subsystems);
  std::vector<bool> flip(x.dims.size(), false);
  for (int s : subsystems) flip[s] = true;

  const auto st = detail::strides(x.dims);
  const long d = x.dim();
  Mat out(d, d);
  std::vector<int> ri(x.dims.size()), ci(x.dims.size());
  for (long r = 0; r < d; ++r) {
    long tmp = r;
    for (int i = static_cast<int>(x.dims.size()) - 1; i >= 0; --i) {
      ri[i] = static_cast<int>(tmp % x.dims[i]);
      tmp /= x.dims[i];
    }
    for (long c = 0; c < d; ++c) {
      tmp = c;
      for (int i = static_cast<int>(x.dims.size()) - 1; i >= 0; --i) {
        ci[i] = static_cast<int>(tmp % x.dims[i]);
        tmp /= x.dims[i];
      }
      long rr = 0, cc = 0;
      for (size_t i = 0; i < x.dims.size(); ++i) {
        rr += (flip[i] ? ci[i] : ri[i]) * st[i];
        cc += (flip[i] ? ri[i] : ci[i]) * st[i];
      }
      out(rr, cc) = x.mat(r, c);
    }
  }
  return Operator(std::move(out), x.dims);
}

/// Tensor product of single-qubit Paulis from a label string over {I,X,Y,Z}.
inline Operator pauli_string(const std::string& labels) {
  if (labels.empty()) throw std::invalid_argument("pauli_string: empty label list");
  auto single = [](char c) -> Mat {
    Mat m(2, 2);
    switch (c) {
      case 'I': m << 1, 0, 0, 1; break;
      case 'X': m << 0, 1, 1, 0; break;
      case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
      case 'Z': m << 1, 0, 0, -1; break;
      default: throw std::invalid_argument(std::string("pauli_string: unknown label '") + c + "'");
    }
    return m;
  };
  Operator out(single(labels[0]), {2});
  for (size_t i = 1; i < labels.size(); ++i) out = tensor(out, Operator(single(labels[i]), {2}));
  return out;
}

/// Unnormalized maximally entangled projector sum_ij |ii><jj| on H_d ⊗ H_d.
/// Trace d; P^2 = d P. This normalization makes the map round trip exact.
inline Operator max_entangled_projector(int d) {
  if (d < 2) throw std::invalid_argument("max_entangled_projector: d must be >= 2");
  Vec e = Vec::Zero(static_cast<long>(d) * d);
  for (int i = 0; i < d; ++i) e(static_cast<long>(i) * d + i) = 1.0;
  return Operator(e * e.adjoint(), {d, d});
}

/// Swap of the two factors of H_d ⊗ H_d.
inline Operator swap_op(int d) {
  const long dd = static_cast<long>(d) * d;
  Mat s = Mat::Zero(dd, dd);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(static_cast<long>(i) * d + j, static_cast<long>(j) * d + i) = 1.0;
  return Operator(std::move(s), {d, d});
}

/// Smallest eigenvalue of the Hermitianized input (x + x†)/2.
inline double min_eigenvalue(const Operator& x, double eps = tol::hermitian) {
  if (!is_hermitian(x.mat, eps))
    throw std::domain_error("min_eigenvalue: operator is not Hermitian within tolerance");
  Mat h = (x.mat + x.mat.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Quantum state: Hermitian, unit trace, positive semi-definite (all within
/// the module tolerances, checked on construction).
struct DensityMatrix {
  Operator op;

  explicit DensityMatrix(Operator o) : op(std::move(o)) {
    if (!is_hermitian(op.mat))
      throw std::invalid_argument("DensityMatrix: not Hermitian within tolerance");
    if (std::abs(op.mat.trace().real() - 1.0) > tol::hermitian || std::abs(op.mat.trace().imag()) > tol::hermitian)
      throw std::invalid_argument("DensityMatrix: trace is not 1 within tolerance");
    if (min_eigenvalue(op) < -tol::psd)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  }

  const Mat& mat() const { return op.mat; }
  long dim() const { return op.dim(); }
};

inline double expectation(const DensityMatrix& rho, const Mat& observable) {
  return (rho.mat() * observable).trace().real();
}

inline cplx expectation_c(const DensityMatrix& rho, const Mat& observable) {
  return (rho.mat() * observable).trace();
}

}  // namespace nlwit
