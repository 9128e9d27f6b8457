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
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "nlwit/accessibility.hpp"
#include "nlwit/cj_map.hpp"
#include "nlwit/witness.hpp"

namespace nlwit {

/// Unitaries and step count for the nonlinear iteration. A single entry in
/// `u_sequence` means a constant U for every step.
struct IterationConfig {
  enum class Mode { full_state, restricted_data };
  std::vector<Operator> u_sequence;
  int n_max = 3;
  Mode mode = Mode::full_state;

  void validate(int dA) const {
    if (n_max < 0) throw std::invalid_argument("IterationConfig: n_max must be >= 0");
    if (u_sequence.empty()) throw std::invalid_argument("IterationConfig: needs at least one unitary");
    if (u_sequence.size() > 1 && static_cast<int>(u_sequence.size()) < n_max)
      throw std::invalid_argument("IterationConfig: U sequence shorter than n_max");
    for (const auto& u : u_sequence) {
      if (u.dim() != static_cast<long>(dA) * dA)
        throw std::invalid_argument("IterationConfig: U dimension must be dA*dA");
      if (!is_unitary(u.mat)) throw std::domain_error("IterationConfig: U is not unitary within tolerance");
    }
  }

  const Operator& u_at(int step) const {
    return u_sequence.size() == 1 ? u_sequence.front() : u_sequence[static_cast<size_t>(step)];
  }

  bool constant_u() const { return u_sequence.size() == 1; }

  static IterationConfig constant(Operator u, int n = 3) {
    IterationConfig cfg;
    cfg.u_sequence.push_back(std::move(u));
    cfg.n_max = n;
    return cfg;
  }
};

/// Everything the recurrence produces: the running Q_n, the improvement
/// sequence w_0..w_n, the squared moduli c_0..c_{n-1}, and the scalar
/// functionals kappa^-1, k, c, d evaluated with the first unitary.
struct IterationState {
  Operator q_current;
  std::vector<double> w_values;
  std::vector<double> c_values;
  double kappa_inv = 0.0;
  cplx k_value{0.0, 0.0};
  cplx c_value{0.0, 0.0};
  cplx d_value{0.0, 0.0};
};

struct ScalarFunctionals {
  double kappa_inv = 0.0;  // Tr(rho ext_map[1])
  cplx k{0.0, 0.0};        // Tr(rho ext_map[U])
  cplx c{0.0, 0.0};        // Tr(rho ext_map[P_psi+ U])
  cplx w0{0.0, 0.0};       // Tr(rho ext_map[P_psi+]) = Tr(rho W)
  cplx d{0.0, 0.0};        // w0 - kappa c k

  double kappa_abs_k() const { return std::abs(k) / kappa_inv; }
};

namespace detail {

using ExpectFn = std::function<cplx(const Mat&)>;  // T on H_AB -> Tr(rho T)

inline ScalarFunctionals scalars_from(const WitnessMap& map, const Operator& u, const ExpectFn& expect) {
  ScalarFunctionals s;
  s.kappa_inv = expect(map.image_identity().mat).real();
  if (s.kappa_inv <= tol::divisor)
    throw std::domain_error("vanishing denominator: Tr(rho ext_map[1]) <= tolerance");
  const auto& imgs = map.images_for(u);
  s.k = expect(imgs.lambda_u.mat);
  s.c = expect(imgs.lambda_pu.mat);
  s.w0 = expect(map.image_p().mat);
  s.d = s.w0 - (s.c * s.k) / s.kappa_inv;
  return s;
}

inline IterationState iterate_core(const WitnessMap& map, const IterationConfig& cfg, const ExpectFn& expect) {
  cfg.validate(map.dA());
  const long din = static_cast<long>(map.dA()) * map.dA();

  IterationState st;
  const double kappa_inv = expect(map.image_identity().mat).real();
  if (kappa_inv <= tol::divisor)
    throw std::domain_error("vanishing denominator: Tr(rho ext_map[1]) <= tolerance");
  const double kappa = 1.0 / kappa_inv;
  st.kappa_inv = kappa_inv;

  st.w_values.push_back(expect(map.image_p().mat).real());

  Operator q = max_entangled_projector(map.dA());
  for (int n = 1; n <= cfg.n_max; ++n) {
    const Operator& u = cfg.u_at(n - 1);
    Mat m = q.mat * u.mat;
    const cplx s = expect(map.apply(Operator(m, {map.dA(), map.dA()})).mat);
    const double cn = std::norm(s);
    st.c_values.push_back(cn);
    st.w_values.push_back(st.w_values.back() - kappa * cn);
    q = Operator(m - kappa * s * Mat::Identity(din, din), {map.dA(), map.dA()});
  }
  st.q_current = std::move(q);

  const ScalarFunctionals sf = scalars_from(map, cfg.u_at(0), expect);
  st.k_value = sf.k;
  st.c_value = sf.c;
  st.d_value = sf.d;
  return st;
}

inline ExpectFn full_state_fn(const DensityMatrix& rho) {
  return [&rho](const Mat& t) { return (rho.mat() * t).trace(); };
}

inline ExpectFn restricted_fn(const ExpectationVector& v, const SpanBasis& basis) {
  return [&v, &basis](const Mat& t) {
    auto val = restricted_expectation(t, basis, v);
    if (!val)
      throw std::domain_error(
          "restricted evaluation needs an operator outside the accessible subspace "
          "(certificate contract violated)");
    return *val;
  };
}

}  // namespace detail

inline ScalarFunctionals scalar_functionals(const DensityMatrix& rho, const WitnessMap& map, const Operator& u) {
  if (rho.dim() != static_cast<long>(map.dA()) * map.dB())
    throw std::invalid_argument("scalar_functionals: state dimension mismatch");
  if (!is_unitary(u.mat)) throw std::domain_error("scalar_functionals: U is not unitary");
  return detail::scalars_from(map, u, detail::full_state_fn(rho));
}

/// The 2x2 matrix whose failure to be positive semi-definite certifies
/// entanglement: entries Tr(sigma 1), Tr(sigma P_psi+ U), Tr(sigma P_psi+)
/// with sigma the adjoint image of rho; Hermitian by construction.
inline Eigen::Matrix2cd moment_matrix(const DensityMatrix& rho, const WitnessMap& map, const Operator& u) {
  if (rho.dim() != static_cast<long>(map.dA()) * map.dB())
    throw std::invalid_argument("moment_matrix: state dimension mismatch");
  if (u.dim() != static_cast<long>(map.dA()) * map.dA())
    throw std::invalid_argument("moment_matrix: U dimension must be dA*dA");
  if (!is_unitary(u.mat)) throw std::domain_error("moment_matrix: U is not unitary within tolerance");

  const Operator sigma = map.apply_adjoint(rho.op);
  const Operator p = max_entangled_projector(map.dA());
  Eigen::Matrix2cd m;
  m(0, 0) = sigma.mat.trace();
  m(0, 1) = (sigma.mat * p.mat * u.mat).trace();
  m(1, 0) = std::conj(m(0, 1));
  m(1, 1) = (sigma.mat * p.mat).trace();
  m(0, 0) = cplx(m(0, 0).real(), 0.0);
  m(1, 1) = cplx(m(1, 1).real(), 0.0);
  return m;
}

/// First nonlinear improvement, Tr(rho W) - |Tr(rho ext_map[P_psi+ U])|^2 / Tr(rho ext_map[1]).
inline double w_nl_first(const DensityMatrix& rho, const WitnessMap& map, const Operator& u) {
  const ScalarFunctionals s = scalar_functionals(rho, map, u);
  return s.w0.real() - std::norm(s.c) / s.kappa_inv;
}

inline IterationState iterate(const DensityMatrix& rho, const WitnessMap& map, const IterationConfig& cfg) {
  if (rho.dim() != static_cast<long>(map.dA()) * map.dB())
    throw std::invalid_argument("iterate: state dimension mismatch");
  return detail::iterate_core(map, cfg, detail::full_state_fn(rho));
}

/// Outcome of the analytic limit. When the sequence diverges the value is
/// -infinity conceptually; `floor_crossing_n` reports the first n at which
/// w_n drops below the configured floor.
struct WInfinity {
  bool diverged = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  long floor_crossing_n = -1;
};

namespace detail {

inline WInfinity w_infinity_from_scalars(const ScalarFunctionals& s, double floor) {
  WInfinity out;
  const double kappa = 1.0 / s.kappa_inv;
  const double kk = kappa * std::abs(s.k);
  const double w0 = s.w0.real();
  const double c2 = std::norm(s.c);
  const double d2 = std::norm(s.d);

  if (kk < 1.0) {
    out.value = w0 - kappa * c2 - kappa * d2 / (1.0 - kk * kk);
    return out;
  }
  if (std::abs(s.d) <= tol::d_zero) {
    // Geometric terms all vanish; the sequence is constant after the first step.
    out.value = w0 - kappa * c2;
    return out;
  }
  out.diverged = true;
  // First n with w_n < floor, from the partial-sum form
  //   w_n = w0 - kappa c2 - kappa d2 * sum_{m=1}^{n-1} (kappa |k|)^{2(m-1)}.
  const double target = (w0 - kappa * c2 - floor) / (kappa * d2);
  const double r = kk * kk;
  if (target < 0.0) {
    out.floor_crossing_n = 1;
  } else if (r <= 1.0) {
    // near the kappa|k| = 1 boundary the sum grows linearly
    out.floor_crossing_n = static_cast<long>(std::min(std::floor(target), 9.0e18)) + 2;
  } else {
    const double m = std::floor(std::log1p((r - 1.0) * target) / std::log(r)) + 1.0;
    out.floor_crossing_n = static_cast<long>(std::min(m, 9.0e18)) + 1;
  }
  // Refine against the exact partial sums when the index is small.
  if (out.floor_crossing_n < 100000) {
    double sum = 0.0, term = 1.0;
    for (long n = 1; n < 100000; ++n) {
      const double wn = w0 - kappa * c2 - (n > 1 ? kappa * d2 * sum : 0.0);
      if (wn < floor) {
        out.floor_crossing_n = n;
        break;
      }
      sum += term;
      term *= r;
      if (!std::isfinite(term) || !std::isfinite(sum)) {
        out.floor_crossing_n = n + 1;
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Analytic limit of the iteration for constant U with U^2 = 1.
/// Alternative: finite value when kappa|k| < 1 (or when d vanishes), else
/// divergence to -infinity, reported as detection with infinite margin.
inline WInfinity w_infinity(const DensityMatrix& rho, const WitnessMap& map, const Operator& u,
                            double floor = -1e6) {
  if (!is_involution(u.mat)) throw std::domain_error("w_infinity: U^2 != 1 within tolerance");
  const ScalarFunctionals s = scalar_functionals(rho, map, u);
  return detail::w_infinity_from_scalars(s, floor);
}

// ---------------------------------------------------------------------------
// Restricted-data path: identical recurrences evaluated from the measured
// expectation vector only. Every operator whose expectation is needed is
// expanded in the accessible subspace; the state itself is never touched.
// ---------------------------------------------------------------------------

inline void require_certificate(const AccessibilityCertificate& cert) {
  if (cert.verdict == Verdict::not_certified || !cert.images_certified())
    throw std::domain_error("restricted evaluation refused: accessibility certificate absent or failed");
}

inline IterationState iterate_restricted(const ExpectationVector& v, const LocalDecomposition& d,
                                         const WitnessMap& map, const IterationConfig& cfg,
                                         const AccessibilityCertificate& cert) {
  require_certificate(cert);
  if (v.values.size() != d.size())
    throw std::invalid_argument("iterate_restricted: expectation vector length mismatch");
  const SpanBasis basis = span_basis(d);
  return detail::iterate_core(map, cfg, detail::restricted_fn(v, basis));
}

inline ScalarFunctionals scalar_functionals_restricted(const ExpectationVector& v, const LocalDecomposition& d,
                                                       const WitnessMap& map, const Operator& u,
                                                       const AccessibilityCertificate& cert) {
  require_certificate(cert);
  if (!is_unitary(u.mat)) throw std::domain_error("scalar_functionals_restricted: U is not unitary");
  const SpanBasis basis = span_basis(d);
  return detail::scalars_from(map, u, detail::restricted_fn(v, basis));
}

inline WInfinity w_infinity_restricted(const ExpectationVector& v, const LocalDecomposition& d,
                                       const WitnessMap& map, const Operator& u,
                                       const AccessibilityCertificate& cert, double floor = -1e6) {
  if (!is_involution(u.mat)) throw std::domain_error("w_infinity: U^2 != 1 within tolerance");
  const ScalarFunctionals s = scalar_functionals_restricted(v, d, map, u, cert);
  return detail::w_infinity_from_scalars(s, floor);
}

}  // namespace nlwit
