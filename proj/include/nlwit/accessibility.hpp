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

#include <algorithm>
#include <vector>

#include "nlwit/cj_map.hpp"
#include "nlwit/witness.hpp"

namespace nlwit {

enum class Verdict { sufficient_accessible, analytic_accessible, not_certified };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::sufficient_accessible: return "sufficient-accessible";
    case Verdict::analytic_accessible: return "analytic-accessible";
    case Verdict::not_certified: return "not-certified";
  }
  return "not-certified";
}

/// Numerical certificate that the nonlinear improvements can be evaluated
/// from the restricted measurement data alone. Two routes are checked:
/// the unital-algebra sufficient condition on the preimage subspace V', and
/// the image-membership condition that gates the analytic formula and the
/// restricted iteration.
struct AccessibilityCertificate {
  int v_dim = 0;
  std::vector<Operator> v_prime_basis;

  struct Checks {
    bool identity_in_v_prime = false;
    bool u_in_v_prime = false;
    bool algebra_closed = false;
    bool image_identity = false;  // ext_map[1] in V
    bool image_u = false;         // ext_map[U] in V
    bool image_pu = false;        // ext_map[P_psi+ U] in V
    bool image_p = false;         // ext_map[P_psi+] in V
  } checks;

  struct Residuals {
    double identity_in_v_prime = 0.0;
    double u_in_v_prime = 0.0;
    double algebra_closed = 0.0;
    double image_identity = 0.0;
    double image_u = 0.0;
    double image_pu = 0.0;
    double image_p = 0.0;
  } residuals;

  Verdict verdict = Verdict::not_certified;

  bool images_certified() const {
    return checks.image_identity && checks.image_u && checks.image_pu;
  }
};

/// Orthonormal basis of the maximal subspace V' of B(H_AA') with
/// ext_map[V'] ⊆ V, computed as the kernel of the complement projector
/// composed with the forward superoperator.
inline std::vector<Operator> preimage_subspace(const WitnessMap& map, const SpanBasis& v_basis,
                                               double kernel_tol = tol::span) {
  const long din = static_cast<long>(map.dA()) * map.dA();
  const Mat& S = map.forward_matrix();
  // P_perp = I - B B† on the vectorized output space.
  Mat K = S - v_basis.vecs * (v_basis.vecs.adjoint() * S);
  Eigen::BDCSVD<Mat> svd(K, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = kernel_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  std::vector<Operator> out;
  for (long i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cut) {
      Vec col = svd.matrixV().col(i);
      out.emplace_back(Eigen::Map<const Mat>(col.data(), din, din), std::vector<int>{map.dA(), map.dA()});
    }
  }
  if (out.empty()) {
    // K had full column rank; V' is trivial. Return an empty basis.
    return out;
  }
  return out;
}

namespace detail {

inline SpanBasis basis_from_orthonormal(const std::vector<Operator>& ops, long op_dim, std::vector<int> dims) {
  SpanBasis b;
  b.op_dim = op_dim;
  b.op_dims = std::move(dims);
  b.ops = ops;
  b.vecs = Mat(op_dim * op_dim, static_cast<long>(ops.size()));
  for (size_t i = 0; i < ops.size(); ++i)
    b.vecs.col(static_cast<long>(i)) = Eigen::Map<const Vec>(ops[i].mat.data(), op_dim * op_dim);
  b.term_coeffs = Mat::Zero(static_cast<long>(ops.size()), 0);
  return b;
}

// Worst-case span residual over all pairwise products of basis elements,
// done in chunks so the 16-dim case stays within a few MB.
inline double closure_residual(const SpanBasis& vp) {
  const long n = vp.dim();
  const long D = vp.op_dim;
  if (n == 0) return 0.0;
  const long chunk = std::max<long>(1, 4096 / std::max<long>(1, D / 16));
  double worst = 0.0;
  Mat prods(D * D, chunk);
  long filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    Mat gamma = vp.vecs.adjoint() * prods.leftCols(filled);
    Mat res = prods.leftCols(filled) - vp.vecs * gamma;
    for (long c = 0; c < filled; ++c) worst = std::max(worst, res.col(c).norm());
    filled = 0;
  };
  for (long a = 0; a < n; ++a) {
    for (long b = 0; b < n; ++b) {
      Mat p = vp.ops[static_cast<size_t>(a)].mat * vp.ops[static_cast<size_t>(b)].mat;
      prods.col(filled++) = Eigen::Map<const Vec>(p.data(), D * D);
      if (filled == chunk) flush();
    }
  }
  flush();
  return worst;
}

inline void fill_image_checks(AccessibilityCertificate& cert, const LocalDecomposition& d,
                              const WitnessMap& map, const Operator& u, const SpanBasis& v,
                              double tolerance) {
  const auto& imgs = map.images_for(u);
  auto record = [&](const Operator& img, bool& flag, double& residual) {
    SpanExpansion e = in_span(img, v, tolerance);
    flag = e.in_span;
    residual = e.residual;
  };
  record(map.image_identity(), cert.checks.image_identity, cert.residuals.image_identity);
  record(imgs.lambda_u, cert.checks.image_u, cert.residuals.image_u);
  record(imgs.lambda_pu, cert.checks.image_pu, cert.residuals.image_pu);
  record(map.image_p(), cert.checks.image_p, cert.residuals.image_p);
  (void)d;
}

}  // namespace detail

/// Sufficient condition: the maximal preimage subspace V' must be a unital
/// associative algebra (closure is tested on basis-element products, which
/// extends to the span by bilinearity) and must contain U.
inline AccessibilityCertificate check_sufficient(const LocalDecomposition& d, const WitnessMap& map,
                                                 const Operator& u, double tolerance = tol::span) {
  if (!is_unitary(u.mat)) throw std::domain_error("check_sufficient: U is not unitary within tolerance");
  SpanBasis v = span_basis(d);
  AccessibilityCertificate cert;
  cert.v_dim = v.dim();
  cert.v_prime_basis = preimage_subspace(map, v);

  const long din = static_cast<long>(map.dA()) * map.dA();
  SpanBasis vp = detail::basis_from_orthonormal(cert.v_prime_basis, din, {map.dA(), map.dA()});

  SpanExpansion id_e = project_onto(Mat::Identity(din, din), vp, tolerance);
  cert.checks.identity_in_v_prime = id_e.in_span;
  cert.residuals.identity_in_v_prime = id_e.residual;

  SpanExpansion u_e = in_span(u, vp, tolerance);
  cert.checks.u_in_v_prime = u_e.in_span;
  cert.residuals.u_in_v_prime = u_e.residual;

  cert.residuals.algebra_closed = detail::closure_residual(vp);
  cert.checks.algebra_closed = cert.residuals.algebra_closed < tolerance;

  detail::fill_image_checks(cert, d, map, u, v, tolerance);

  cert.verdict = (cert.checks.identity_in_v_prime && cert.checks.u_in_v_prime && cert.checks.algebra_closed)
                     ? Verdict::sufficient_accessible
                     : Verdict::not_certified;
  return cert;
}

/// Necessary-and-sufficient condition for the analytic formula (constant U
/// with U^2 = 1): the images ext_map[1], ext_map[U] and ext_map[P_psi+ U]
/// must all lie in the accessible subspace V. This is the certificate that
/// gates the restricted-data iteration and the restricted w_infinity.
inline AccessibilityCertificate check_analytic(const LocalDecomposition& d, const WitnessMap& map,
                                               const Operator& u, double tolerance = tol::span) {
  if (!is_unitary(u.mat)) throw std::domain_error("check_analytic: U is not unitary within tolerance");
  if (!is_involution(u.mat)) throw std::domain_error("check_analytic: U^2 != 1 within tolerance");
  SpanBasis v = span_basis(d);
  AccessibilityCertificate cert;
  cert.v_dim = v.dim();
  detail::fill_image_checks(cert, d, map, u, v, tolerance);
  cert.verdict = cert.images_certified() ? Verdict::analytic_accessible : Verdict::not_certified;
  return cert;
}

}  // namespace nlwit
