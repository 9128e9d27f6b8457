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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nlwit/operator.hpp"

namespace nlwit {

// ---------------------------------------------------------------------------
// Deterministic RNG plumbing. All randomized factories take an explicit seed
// and derived streams come from splitmix64 so results are reproducible.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return std::mt19937_64(splitmix64(s));
}

/// Uniform double in [0,1) built from the top 53 bits, independent of the
/// standard library's distribution implementation.
inline double canonical_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; consumes two uniforms.
  double u1 = canonical_double(rng);
  while (u1 <= 0.0) u1 = canonical_double(rng);
  const double u2 = canonical_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Vec haar_ket(std::mt19937_64& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = cplx(gaussian(rng), gaussian(rng));
  return v / v.norm();
}

inline Mat haar_unitary(std::mt19937_64& rng, int d) {
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(gaussian(rng), gaussian(rng));
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    cplx phase = r(i, i) / std::abs(r(i, i));
    q.col(i) *= phase;
  }
  return q;
}

// ---------------------------------------------------------------------------
// State families
// ---------------------------------------------------------------------------

/// Bell basis convention Psi_0..Psi_3 = {Phi+, Phi-, Psi+, Psi-}.
inline Vec bell_ket(int which) {
  Vec v = Vec::Zero(4);
  const double s = 1.0 / std::sqrt(2.0);
  switch (which) {
    case 0: v(0) = s; v(3) = s; break;         // Phi+
    case 1: v(0) = s; v(3) = -s; break;        // Phi-
    case 2: v(1) = s; v(2) = s; break;         // Psi+
    case 3: v(1) = s; v(2) = -s; break;        // Psi-
    default: throw std::invalid_argument("bell_ket: index must be 0..3");
  }
  return v;
}

inline DensityMatrix bell_state(int which) {
  Vec v = bell_ket(which);
  return DensityMatrix(Operator(v * v.adjoint(), {2, 2}));
}

/// (1-p) rho + p 1/D.
inline DensityMatrix white_noise_mix(const DensityMatrix& rho, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("white_noise_mix: p must be in [0,1]");
  const long d = rho.dim();
  Mat m = (1.0 - p) * rho.mat() + (p / static_cast<double>(d)) * Mat::Identity(d, d);
  return DensityMatrix(Operator(std::move(m), rho.op.dims));
}

/// rho(phi) = w |phi><phi| + ((1-w)/4) 1 with |phi> = (|01> - e^{i phi}|10>)/sqrt(2).
/// The default weight w = 2/3 puts the white-noise admixture at 1/12.
inline DensityMatrix phi_family(double phi, double pure_weight = 2.0 / 3.0) {
  if (pure_weight < 0.0 || pure_weight > 1.0)
    throw std::invalid_argument("phi_family: weight must be in [0,1]");
  Vec v = Vec::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -std::exp(cplx(0.0, phi)) / std::sqrt(2.0);
  Mat m = pure_weight * (v * v.adjoint()).eval() + ((1.0 - pure_weight) / 4.0) * Mat::Identity(4, 4);
  return DensityMatrix(Operator(std::move(m), {2, 2}));
}

/// Four-qubit Smolin state (1/4) sum_k P_{Psi_k} ⊗ P_{Psi_k}.
inline DensityMatrix smolin_state() {
  Mat m = Mat::Zero(16, 16);
  for (int k = 0; k < 4; ++k) {
    Vec v = bell_ket(k);
    Mat pb = v * v.adjoint();
    Operator t = tensor(Operator(pb, {2, 2}), Operator(pb, {2, 2}));
    m += t.mat / 4.0;
  }
  return DensityMatrix(Operator(std::move(m), {2, 2, 2, 2}));
}

inline DensityMatrix smolin_noisy(double p) { return white_noise_mix(smolin_state(), p); }

/// Pure product state from local kets (one per subsystem).
inline DensityMatrix product_state(const std::vector<Vec>& kets) {
  if (kets.empty()) throw std::invalid_argument("product_state: no kets given");
  Vec full(1);
  full(0) = 1.0;
  std::vector<int> dims;
  for (const Vec& k : kets) {
    if (k.size() < 2) throw std::invalid_argument("product_state: ket must have dimension >= 2");
    const double n = k.norm();
    if (n <= 0.0) throw std::invalid_argument("product_state: zero ket");
    Vec kn = k / n;
    Vec next(full.size() * kn.size());
    for (long i = 0; i < full.size(); ++i)
      for (long j = 0; j < kn.size(); ++j) next(i * kn.size() + j) = full(i) * kn(j);
    full = next;
    dims.push_back(static_cast<int>(k.size()));
  }
  return DensityMatrix(Operator(full * full.adjoint(), dims));
}

inline DensityMatrix random_pure_product(std::mt19937_64& rng, const std::vector<int>& dims) {
  std::vector<Vec> kets;
  kets.reserve(dims.size());
  for (int d : dims) kets.push_back(haar_ket(rng, d));
  return product_state(kets);
}

/// Convex mixture of Haar-random pure states that are product across every
/// listed subsystem factor; weights are uniform on the simplex.
inline DensityMatrix random_separable(const std::vector<int>& dims, std::uint64_t seed, int mixture_size) {
  if (mixture_size < 1) throw std::invalid_argument("random_separable: mixture size must be >= 1");
  auto rng = seeded_rng(seed);
  const long d = Operator::total_dim(dims);
  std::vector<double> w(static_cast<size_t>(mixture_size));
  double wsum = 0.0;
  for (auto& wi : w) {
    wi = -std::log(1.0 - canonical_double(rng));
    wsum += wi;
  }
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < mixture_size; ++i) m += (w[static_cast<size_t>(i)] / wsum) * random_pure_product(rng, dims).mat();
  return DensityMatrix(Operator(std::move(m), dims));
}

/// Full-rank random state from a Ginibre matrix, G G† / Tr.
inline DensityMatrix random_state(const std::vector<int>& dims, std::uint64_t seed) {
  auto rng = seeded_rng(seed);
  const long d = Operator::total_dim(dims);
  Mat g(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) g(i, j) = cplx(gaussian(rng), gaussian(rng));
  Mat m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(Operator(std::move(m), dims));
}

// ---------------------------------------------------------------------------
// Declarative state specification (mirrors the CLI's JSON form)
// ---------------------------------------------------------------------------

struct StateSpec {
  enum class Family { bell, phi_family, smolin, product, random_separable, random_state };
  Family family = Family::bell;

  int bell_which = 0;              // bell
  double phi = 0.0;                // phi_family
  double pure_weight = 2.0 / 3.0;  // phi_family exploration knob
  double p = 0.0;                  // smolin noise
  std::vector<Vec> kets;           // product
  std::vector<int> dims;           // random families
  std::uint64_t seed = 0;          // random families
  int mixture_size = 4;            // random_separable
};

inline DensityMatrix make(const StateSpec& spec) {
  switch (spec.family) {
    case StateSpec::Family::bell: return bell_state(spec.bell_which);
    case StateSpec::Family::phi_family: return phi_family(spec.phi, spec.pure_weight);
    case StateSpec::Family::smolin:
      if (spec.p < 0.0 || spec.p > 1.0) throw std::invalid_argument("smolin: p must be in [0,1]");
      return smolin_noisy(spec.p);
    case StateSpec::Family::product: return product_state(spec.kets);
    case StateSpec::Family::random_separable: return random_separable(spec.dims, spec.seed, spec.mixture_size);
    case StateSpec::Family::random_state: return random_state(spec.dims, spec.seed);
  }
  throw std::invalid_argument("make: unknown state family");
}

}  // namespace nlwit
