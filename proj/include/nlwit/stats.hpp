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
#include <optional>
#include <vector>

#include "nlwit/engine.hpp"
#include "nlwit/states.hpp"

namespace nlwit {

/// Finite-shot estimates of the decomposition's expectation values, with
/// per-term standard errors. Deterministic given the seed.
struct MeasurementRecord {
  ExpectationVector estimates;   // provenance: simulated
  std::vector<double> stderrs;
  int shots = 0;
  std::uint64_t seed = 0;
};

/// Samples `shots` projective outcomes of each A_i ⊗ B_i from the Born
/// probabilities of rho and returns sample means and standard errors.
inline MeasurementRecord simulate_expectations(const DensityMatrix& rho, const LocalDecomposition& d,
                                               int shots, std::uint64_t seed) {
  d.validate();
  if (shots < 1) throw std::invalid_argument("simulate_expectations: shots must be >= 1");
  if (rho.dim() != static_cast<long>(d.dA) * d.dB)
    throw std::invalid_argument("simulate_expectations: state dimension mismatch");

  MeasurementRecord rec;
  rec.estimates.provenance = ExpectationVector::Provenance::simulated;
  rec.shots = shots;
  rec.seed = seed;

  for (size_t i = 0; i < d.size(); ++i) {
    const Operator obs = d.observable(i);
    Eigen::SelfAdjointEigenSolver<Mat> es((obs.mat + obs.mat.adjoint()) / 2.0);
    const auto& vals = es.eigenvalues();
    const Mat& vecs = es.eigenvectors();

    // Born probabilities, clipped against tiny negative round-off.
    const long dd = vals.size();
    std::vector<double> probs(static_cast<size_t>(dd));
    double psum = 0.0;
    for (long k = 0; k < dd; ++k) {
      double p = (vecs.col(k).adjoint() * rho.mat() * vecs.col(k))(0, 0).real();
      probs[static_cast<size_t>(k)] = std::max(0.0, p);
      psum += probs[static_cast<size_t>(k)];
    }
    for (auto& p : probs) p /= psum;

    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      cdf[k] = acc;
    }
    cdf.back() = 1.0;

    auto rng = seeded_rng(seed, static_cast<std::uint64_t>(i));
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < shots; ++s) {
      const double u = canonical_double(rng);
      size_t k = 0;
      while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
      const double x = vals(static_cast<long>(k));
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / shots;
    double se = 0.0;
    if (shots > 1) {
      const double var = std::max(0.0, (sumsq - shots * mean * mean) / (shots - 1));
      se = std::sqrt(var / shots);
    }
    rec.estimates.values.push_back(mean);
    rec.stderrs.push_back(se);
  }
  return rec;
}

/// Delta-method error bars for the nonlinear sequence (and the analytic
/// limit when it stays finite): central finite differences of each w_n with
/// respect to every measured expectation, combined in quadrature with the
/// per-term standard errors.
struct ErrorPropagation {
  std::vector<double> w_values;
  std::vector<double> w_stderrs;
  std::optional<double> w_infinity_value;
  std::optional<double> w_infinity_stderr;
  bool w_infinity_diverged = false;
};

inline ErrorPropagation propagate(const MeasurementRecord& rec, const LocalDecomposition& d,
                                  const WitnessMap& map, const IterationConfig& cfg,
                                  const AccessibilityCertificate& cert) {
  require_certificate(cert);
  if (rec.estimates.values.size() != d.size())
    throw std::invalid_argument("propagate: record length does not match decomposition");

  const bool analytic = cfg.constant_u() && is_involution(cfg.u_at(0).mat);

  struct Eval {
    std::vector<double> w;
    std::optional<double> winf;
    bool diverged = false;
  };
  auto evaluate = [&](const ExpectationVector& v) {
    Eval e;
    e.w = iterate_restricted(v, d, map, cfg, cert).w_values;
    if (analytic) {
      WInfinity wi = w_infinity_restricted(v, d, map, cfg.u_at(0), cert);
      e.diverged = wi.diverged;
      if (!wi.diverged) e.winf = wi.value;
    }
    return e;
  };

  const Eval base = evaluate(rec.estimates);
  ErrorPropagation out;
  out.w_values = base.w;
  out.w_infinity_value = base.winf;
  out.w_infinity_diverged = base.diverged;

  const double h = 1e-5;
  const size_t n_terms = d.size();
  std::vector<double> var_w(base.w.size(), 0.0);
  double var_winf = 0.0;
  bool winf_ok = base.winf.has_value();

  for (size_t i = 0; i < n_terms; ++i) {
    ExpectationVector vp = rec.estimates, vm = rec.estimates;
    vp.values[i] += h;
    vm.values[i] -= h;
    const Eval ep = evaluate(vp);
    const Eval em = evaluate(vm);
    const double se = rec.stderrs[i];
    for (size_t n = 0; n < var_w.size(); ++n) {
      const double g = (ep.w[n] - em.w[n]) / (2.0 * h);
      var_w[n] += g * g * se * se;
    }
    if (winf_ok && ep.winf && em.winf) {
      const double g = (*ep.winf - *em.winf) / (2.0 * h);
      var_winf += g * g * se * se;
    } else {
      winf_ok = false;
    }
  }

  out.w_stderrs.resize(var_w.size());
  for (size_t n = 0; n < var_w.size(); ++n) out.w_stderrs[n] = std::sqrt(var_w[n]);
  if (winf_ok) out.w_infinity_stderr = std::sqrt(var_winf);
  return out;
}

/// Monte-Carlo detection rates over independent simulated experiments. The
/// linear and nonlinear verdicts within one trial share the same simulated
/// record, which makes the nonlinear-dominates-linear inequality exact per
/// trial (kappa > 0), not just statistical.
struct DetectionRates {
  double linear_rate = 0.0;
  double nonlinear_rate = 0.0;
  int trials = 0;
  int dominance_violations = 0;  // trials where linear detected but nonlinear did not
};

inline DetectionRates detection_rate(const DensityMatrix& rho, const LocalDecomposition& d,
                                     const WitnessMap& map, const IterationConfig& cfg, int shots,
                                     int trials, std::uint64_t seed, const AccessibilityCertificate& cert) {
  require_certificate(cert);
  if (trials < 1) throw std::invalid_argument("detection_rate: trials must be >= 1");

  DetectionRates rates;
  rates.trials = trials;
  int lin = 0, nl = 0;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t s = seed;
    const std::uint64_t trial_seed = splitmix64(s) ^ (static_cast<std::uint64_t>(t) * 0x9E3779B97F4A7C15ULL);
    const MeasurementRecord rec = simulate_expectations(rho, d, shots, trial_seed);
    const double w0 = linear_witness_value(rec.estimates, d);
    const IterationState st = iterate_restricted(rec.estimates, d, map, cfg, cert);
    const bool lin_det = w0 < 0.0;
    const bool nl_det = st.w_values.back() < 0.0;
    lin += lin_det ? 1 : 0;
    nl += nl_det ? 1 : 0;
    if (lin_det && !nl_det) ++rates.dominance_violations;
  }
  rates.linear_rate = static_cast<double>(lin) / trials;
  rates.nonlinear_rate = static_cast<double>(nl) / trials;
  return rates;
}

}  // namespace nlwit
