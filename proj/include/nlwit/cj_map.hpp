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

#include <utility>
#include <vector>

#include "nlwit/operator.hpp"

namespace nlwit {

/// Extended map induced by a witness W on H_AB:
///
///   Lambda(X)        = Tr_A( W^{T_A} (X ⊗ 1_B) )          on B(H_A) -> B(H_B)
///   ext_map[Y]       = (Id_A ⊗ Lambda)[Y]                 on B(H_AA') -> B(H_AB)
///
/// with the partial transposition in the computational basis. The extension
/// acts on the second (A') tensor factor. Both directions are stored as
/// explicit superoperator matrices over column-stacking vectorization; the
/// adjoint is then just the conjugate transpose. O(D^4) storage is fine at
/// the dimensions this library targets.
class WitnessMap {
 public:
  WitnessMap(Operator w, int dA, int dB) : witness_(std::move(w)), dA_(dA), dB_(dB) {
    if (dA < 2 || dB < 2) throw std::invalid_argument("WitnessMap: subsystem dims must be >= 2");
    if (witness_.dim() != static_cast<long>(dA) * dB)
      throw std::invalid_argument("WitnessMap: witness dimension does not match dA*dB");
    if (!is_hermitian(witness_.mat))
      throw std::invalid_argument("WitnessMap: witness is not Hermitian within tolerance");

    const long din = static_cast<long>(dA) * dA;    // H_AA'
    const long dout = static_cast<long>(dA) * dB;   // H_AB
    const Operator wta = partial_transpose(Operator(witness_.mat, {dA, dB}), {0});

    forward_ = Mat::Zero(dout * dout, din * din);
    Mat unit = Mat::Zero(din, din);
    for (long col = 0; col < din * din; ++col) {
      const long i = col % din, j = col / din;   // column-stacking basis unit |i><j|
      unit(i, j) = 1.0;
      Mat img = apply_direct(wta.mat, unit);
      forward_.col(col) = Eigen::Map<const Vec>(img.data(), dout * dout);
      unit(i, j) = 0.0;
    }
    adjoint_ = forward_.adjoint();

    image_identity_ = unvec_out(forward_ * vec_in(Mat::Identity(din, din)));
    image_p_ = unvec_out(forward_ * vec_in(max_entangled_projector(dA).mat));
  }

  int dA() const { return dA_; }
  int dB() const { return dB_; }
  const Operator& witness() const { return witness_; }
  const Mat& forward_matrix() const { return forward_; }
  const Mat& adjoint_matrix() const { return adjoint_; }

  /// ext_map[1_AA'], cached.
  const Operator& image_identity() const { return image_identity_; }
  /// ext_map[P_psi+] (= the witness, up to numerical error), cached.
  const Operator& image_p() const { return image_p_; }

  /// ext_map[x] for x on H_AA'.
  Operator apply(const Operator& x) const {
    if (x.dim() != static_cast<long>(dA_) * dA_)
      throw std::invalid_argument("WitnessMap::apply: operator dimension must be dA*dA");
    return unvec_out(forward_ * vec_in(x.mat));
  }

  /// Adjoint map: ext_map†[rho] for rho on H_AB, satisfying
  /// <ext_map[X], Y> = <X, ext_map†[Y]> in the Hilbert–Schmidt inner product.
  Operator apply_adjoint(const Operator& rho) const {
    if (rho.dim() != static_cast<long>(dA_) * dB_)
      throw std::invalid_argument("WitnessMap::apply_adjoint: operator dimension must be dA*dB");
    Vec v = adjoint_ * Eigen::Map<const Vec>(rho.mat.data(), rho.dim() * rho.dim());
    const long din = static_cast<long>(dA_) * dA_;
    return Operator(Eigen::Map<const Mat>(v.data(), din, din), {dA_, dA_});
  }

  struct UImages {
    Operator lambda_u;    // ext_map[U]
    Operator lambda_pu;   // ext_map[P_psi+ U]
  };

  /// Images for a configured unitary, cached per distinct U.
  const UImages& images_for(const Operator& u) const {
    for (const auto& entry : u_cache_)
      if (entry.first.rows() == u.mat.rows() && (entry.first - u.mat).cwiseAbs().maxCoeff() == 0.0)
        return entry.second;
    UImages imgs{apply(u), apply(Operator(max_entangled_projector(dA_).mat * u.mat, {dA_, dA_}))};
    u_cache_.emplace_back(u.mat, std::move(imgs));
    return u_cache_.back().second;
  }

 private:
  Vec vec_in(const Mat& m) const { return Eigen::Map<const Vec>(m.data(), m.rows() * m.cols()); }

  Operator unvec_out(const Vec& v) const {
    const long dout = static_cast<long>(dA_) * dB_;
    return Operator(Eigen::Map<const Mat>(v.data(), dout, dout), {dA_, dB_});
  }

  // Direct evaluation of (Id ⊗ Lambda)[x] from the defining partial-trace
  // formula; used once per vectorization basis element during construction.
  Mat apply_direct(const Mat& wta, const Mat& x) const {
    const long dout = static_cast<long>(dA_) * dB_;
    Mat out = Mat::Zero(dout, dout);
    Mat block(dA_, dA_);
    for (int i = 0; i < dA_; ++i)
      for (int j = 0; j < dA_; ++j) {
        for (int a = 0; a < dA_; ++a)
          for (int b = 0; b < dA_; ++b) block(a, b) = x(static_cast<long>(i) * dA_ + a, static_cast<long>(j) * dA_ + b);
        // Lambda(block) = Tr_A( W^{T_A} (block ⊗ 1_B) )
        Mat lam = Mat::Zero(dB_, dB_);
        for (int a = 0; a < dA_; ++a)
          for (int b = 0; b < dA_; ++b)
            if (block(b, a) != 0.0)
              lam += wta.block(static_cast<long>(a) * dB_, static_cast<long>(b) * dB_, dB_, dB_) * block(b, a);
        out.block(static_cast<long>(i) * dB_, static_cast<long>(j) * dB_, dB_, dB_) = lam;
      }
    return out;
  }

  Operator witness_;
  int dA_, dB_;
  Mat forward_, adjoint_;
  Operator image_identity_, image_p_;
  mutable std::vector<std::pair<Mat, UImages>> u_cache_;
};

inline WitnessMap map_from_witness(const Operator& w, int dA, int dB) {
  return WitnessMap(w, dA, dB);
}

}  // namespace nlwit
