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

#include <cmath>
#include <vector>

#include "nlwit/engine.hpp"
#include "nlwit/io.hpp"
#include "nlwit/states.hpp"

namespace nlwit::testing {

inline double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Two-qubit corpus setup: W0 = (1 + sum sigma ⊗ sigma)/4 with U = swap.
struct TwoQubitSetup {
  LocalDecomposition decomposition = w0_decomposition();
  Operator witness = assemble(decomposition);
  WitnessMap map{witness, 2, 2};
  Operator u = swap_op(2);
};

/// Four-qubit Smolin corpus setup across the 12|34 cut with U = swap on the
/// 4-dimensional halves.
struct SmolinSetup {
  LocalDecomposition decomposition = smolin_decomposition();
  Operator witness = assemble(decomposition);
  WitnessMap map{witness, 4, 4};
  Operator u = swap_op(4);
};

// ---------------------------------------------------------------------------
// Independent oracle: the extended map evaluated directly from its defining
// partial-trace formula using the operator-core primitives, with no
// superoperator matrix involved. Used to cross-check the implementation path.
// ---------------------------------------------------------------------------

inline Operator oracle_apply(const Operator& witness, int dA, int dB, const Operator& x) {
  const Operator wta = partial_transpose(Operator(witness.mat, {dA, dB}), {0});
  const Mat eyeB = Mat::Identity(dB, dB);
  Mat out = Mat::Zero(static_cast<long>(dA) * dB, static_cast<long>(dA) * dB);
  for (int i = 0; i < dA; ++i)
    for (int j = 0; j < dA; ++j) {
      Mat block(dA, dA);
      for (int a = 0; a < dA; ++a)
        for (int b = 0; b < dA; ++b) block(a, b) = x.mat(static_cast<long>(i) * dA + a, static_cast<long>(j) * dA + b);
      Operator arg(Operator(block, {dA}));
      Operator lifted = tensor(arg, Operator(eyeB, {dB}));
      Operator prod(wta.mat * lifted.mat, {dA, dB});
      Operator lam = partial_trace(prod, {0});
      out.block(static_cast<long>(i) * dB, static_cast<long>(j) * dB, dB, dB) = lam.mat;
    }
  return Operator(std::move(out), {dA, dB});
}

/// Literal evaluation of the Q_n recurrence with oracle_apply as the map.
inline std::vector<double> oracle_iterate(const Operator& witness, int dA, int dB, const DensityMatrix& rho,
                                          const Operator& u, int n_max) {
  const long din = static_cast<long>(dA) * dA;
  const Operator p = max_entangled_projector(dA);
  const double kappa_inv =
      (rho.mat() * oracle_apply(witness, dA, dB, identity_op({dA, dA})).mat).trace().real();
  const double kappa = 1.0 / kappa_inv;
  std::vector<double> w{(rho.mat() * oracle_apply(witness, dA, dB, p).mat).trace().real()};
  Mat q = p.mat;
  for (int n = 1; n <= n_max; ++n) {
    Mat m = q * u.mat;
    const cplx s = (rho.mat() * oracle_apply(witness, dA, dB, Operator(m, {dA, dA})).mat).trace();
    w.push_back(w.back() - kappa * std::norm(s));
    q = m - kappa * s * Mat::Identity(din, din);
  }
  return w;
}

/// Partial sums of the geometric series behind the analytic limit; an
/// independent route to the same w_n for constant involutive U.
inline std::vector<double> series_partial_sums(const ScalarFunctionals& s, int n_max) {
  const double kappa = 1.0 / s.kappa_inv;
  const double r = std::pow(kappa * std::abs(s.k), 2.0);
  std::vector<double> w{s.w0.real()};
  double geo = 0.0, term = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    double wn = s.w0.real() - kappa * std::norm(s.c);
    if (n > 1) wn -= kappa * std::norm(s.d) * geo;
    w.push_back(wn);
    geo += term;
    term *= r;
  }
  return w;
}

inline LocalDecomposition scaled(const LocalDecomposition& d, double s) {
  LocalDecomposition out = d;
  for (auto& t : out.terms) t.coeff *= s;
  return out;
}

}  // namespace nlwit::testing
