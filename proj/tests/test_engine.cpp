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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "nlwit/engine.hpp"
#include "nlwit/states.hpp"

using namespace nlwit;
using nlwit::testing::max_abs_diff;
using nlwit::testing::SmolinSetup;
using nlwit::testing::TwoQubitSetup;

namespace {

DensityMatrix smolin_ab(double p) {
  const DensityMatrix rho = smolin_noisy(p);
  return DensityMatrix(Operator(rho.mat(), std::vector<int>{4, 4}));
}

AccessibilityCertificate cert_for(const LocalDecomposition& d, const WitnessMap& map, const Operator& u) {
  return check_analytic(d, map, u);
}

}  // namespace

TEST_CASE("moment matrix at the Bell state is the pinned 2x2") {
  const TwoQubitSetup two;
  const Eigen::Matrix2cd m = moment_matrix(bell_state(0), two.map, two.u);
  CHECK(std::abs(m(0, 0) - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(m(0, 1) - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(m(1, 0) - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(m(1, 1) - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(m.determinant()) < 1e-12);
}

TEST_CASE("moment matrix is PSD on separable states for the shipped unitaries") {
  const TwoQubitSetup two;
  const DensityMatrix zz = product_state({Vec::Unit(2, 0), Vec::Unit(2, 0)});
  for (const Operator& u : {swap_op(2), Operator(pauli_string("ZZ").mat, {2, 2}), Operator(pauli_string("XI").mat, {2, 2})}) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(moment_matrix(zz, two.map, u));
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
  auto rng = seeded_rng(41);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix sep = random_separable({2, 2}, rng(), 1 + static_cast<int>(rng() % 8));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(moment_matrix(sep, two.map, two.u));
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("moment matrix of the maximally mixed state") {
  const TwoQubitSetup two;
  const DensityMatrix mixed(Operator(Mat::Identity(4, 4) / 4.0, {2, 2}));
  const Eigen::Matrix2cd m = moment_matrix(mixed, two.map, two.u);
  CHECK(std::abs(m(0, 0) - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(m(0, 1) - cplx(0.25, 0.0)) < 1e-12);
  CHECK(std::abs(m(1, 1) - cplx(0.25, 0.0)) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  Mat notu = Mat::Identity(4, 4);
  notu(0, 0) = 2.0;
  CHECK_THROWS_AS(moment_matrix(mixed, two.map, Operator(notu, {2, 2})), std::domain_error);
}

TEST_CASE("first nonlinear improvement") {
  const TwoQubitSetup two;
  CHECK(w_nl_first(bell_state(0), two.map, two.u) == Catch::Approx(0.0).margin(1e-12));

  // c(rho) = 0 makes it coincide with the linear value: the phi-family state
  // at cos(phi) = 1/4 has Tr(rho W) = 0 = c under the swap unitary.
  const DensityMatrix rho0 = phi_family(std::acos(0.25));
  const double lin = expectation(rho0, two.witness.mat);
  CHECK(std::abs(lin) < 1e-12);
  CHECK(std::abs(w_nl_first(rho0, two.map, two.u) - lin) < 1e-12);

  auto rng = seeded_rng(42);
  for (int t = 0; t < 200; ++t) {
    const DensityMatrix sep = random_separable({2, 2}, rng(), 1 + static_cast<int>(rng() % 8));
    CHECK(w_nl_first(sep, two.map, two.u) >= -1e-9);
  }
}

TEST_CASE("determinant consistency between the moment matrix and w_1") {
  const TwoQubitSetup two;
  auto rng = seeded_rng(43);
  for (int t = 0; t < 30; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const double det = moment_matrix(rho, two.map, two.u).determinant().real();
    const double kappa_inv = scalar_functionals(rho, two.map, two.u).kappa_inv;
    CHECK(std::abs(det - kappa_inv * w_nl_first(rho, two.map, two.u)) < 1e-10);
  }
}

TEST_CASE("iteration reproduces the pinned Bell sequence") {
  const TwoQubitSetup two;
  const auto st = iterate(bell_state(0), two.map, IterationConfig::constant(two.u, 3));
  REQUIRE(st.w_values.size() == 4);
  CHECK(st.w_values[0] == Catch::Approx(0.5).margin(1e-10));
  CHECK(st.w_values[1] == Catch::Approx(0.0).margin(1e-10));
  CHECK(st.w_values[2] == Catch::Approx(-0.5).margin(1e-10));
  CHECK(st.w_values[3] == Catch::Approx(-2.5).margin(1e-10));

  CHECK(st.kappa_inv == Catch::Approx(0.5).margin(1e-12));
  CHECK(std::abs(st.k_value - cplx(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(st.c_value - cplx(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(st.d_value - cplx(-0.5, 0.0)) < 1e-12);

  // independent oracle path: literal recurrence over the direct map formula
  const auto oracle = nlwit::testing::oracle_iterate(two.witness, 2, 2, bell_state(0), two.u, 3);
  for (size_t n = 0; n < oracle.size(); ++n) CHECK(st.w_values[n] == Catch::Approx(oracle[n]).margin(1e-10));
}

TEST_CASE("iteration matches the oracle on random states and witnesses") {
  const TwoQubitSetup two;
  const SmolinSetup smolin;
  auto rng = seeded_rng(44);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const auto st = iterate(rho, two.map, IterationConfig::constant(two.u, 6));
    const auto oracle = nlwit::testing::oracle_iterate(two.witness, 2, 2, rho, two.u, 6);
    for (size_t n = 0; n < oracle.size(); ++n) CHECK(st.w_values[n] == Catch::Approx(oracle[n]).margin(1e-9));
  }
  const DensityMatrix rho = random_state({4, 4}, 7);
  const auto st = iterate(rho, smolin.map, IterationConfig::constant(smolin.u, 4));
  const auto oracle = nlwit::testing::oracle_iterate(smolin.witness, 4, 4, rho, smolin.u, 4);
  for (size_t n = 0; n < oracle.size(); ++n) CHECK(st.w_values[n] == Catch::Approx(oracle[n]).margin(1e-9));
}

TEST_CASE("w sequence is non-increasing for positive kappa") {
  const TwoQubitSetup two;
  auto rng = seeded_rng(45);
  for (int t = 0; t < 25; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const auto st = iterate(rho, two.map, IterationConfig::constant(two.u, 8));
    for (size_t n = 1; n < st.w_values.size(); ++n) CHECK(st.w_values[n] <= st.w_values[n - 1] + 1e-12);
    for (double c : st.c_values) CHECK(c >= 0.0);
  }
}

TEST_CASE("c(rho) = 0 freezes the sequence") {
  const TwoQubitSetup two;
  const DensityMatrix rho0 = phi_family(std::acos(0.25));
  const auto st = iterate(rho0, two.map, IterationConfig::constant(two.u, 5));
  for (double w : st.w_values) CHECK(std::abs(w - st.w_values[0]) < 1e-10);
}

TEST_CASE("vanishing denominator is an error") {
  LocalDecomposition d;
  d.dA = d.dB = 2;
  d.terms.push_back({1.0, pauli_string("Z"), pauli_string("Z"), "Z:Z"});
  const WitnessMap map(assemble(d), 2, 2);  // Tr_A of ZZ vanishes
  const DensityMatrix mixed(Operator(Mat::Identity(4, 4) / 4.0, {2, 2}));
  CHECK_THROWS_AS(iterate(mixed, map, IterationConfig::constant(swap_op(2), 2)), std::domain_error);
  CHECK_THROWS_AS(w_nl_first(mixed, map, swap_op(2)), std::domain_error);
}

TEST_CASE("analytic limit: divergence alternative at the Bell state") {
  const TwoQubitSetup two;
  const auto sf = scalar_functionals(bell_state(0), two.map, two.u);
  CHECK(sf.kappa_abs_k() == Catch::Approx(2.0).margin(1e-12));
  CHECK(std::abs(sf.d) == Catch::Approx(0.5).margin(1e-12));

  const auto wi = w_infinity(bell_state(0), two.map, two.u);
  REQUIRE(wi.diverged);
  // series: w_n = 1/2 - 1/2 - (1/2)(4^{n-1} - 1)/3 crosses -1e6 at n = 13
  CHECK(wi.floor_crossing_n == 13);
}

TEST_CASE("analytic limit: finite values match closed forms") {
  const TwoQubitSetup two;
  const auto wi_pi = w_infinity(phi_family(M_PI), two.map, two.u);
  REQUIRE_FALSE(wi_pi.diverged);
  CHECK(wi_pi.value == Catch::Approx(-5.0 / 28.0).margin(1e-12));

  const Operator uzz(pauli_string("ZZ").mat, {2, 2});
  const auto wi_zz = w_infinity(phi_family(M_PI), two.map, uzz);
  REQUIRE_FALSE(wi_zz.diverged);
  CHECK(wi_zz.value == Catch::Approx(-5.0 / 3.0).margin(1e-12));

  Vec plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto wi_0p = w_infinity(product_state({Vec::Unit(2, 0), plus}), two.map, two.u);
  REQUIRE_FALSE(wi_0p.diverged);
  CHECK(wi_0p.value == Catch::Approx(1.0 / 12.0).margin(1e-12));

  const SmolinSetup smolin;
  for (double p : {0.0, 0.3, 2.0 / 3.0, 1.0}) {
    const double w0 = (3.0 * p - 2.0) / 16.0;
    const auto wi = w_infinity(smolin_ab(p), smolin.map, smolin.u);
    REQUIRE_FALSE(wi.diverged);
    CHECK(wi.value == Catch::Approx(w0 * (1.0 - 4.0 * w0) / (1.0 + 4.0 * w0)).margin(1e-12));
  }

  // involution precondition
  Mat phase = Mat::Identity(4, 4);
  phase(1, 1) = cplx(0.0, 1.0);
  CHECK_THROWS_AS(w_infinity(bell_state(0), two.map, Operator(phase, {2, 2})), std::domain_error);
}

TEST_CASE("iterates agree with the series partial sums in the convergent case") {
  const TwoQubitSetup two;
  auto rng = seeded_rng(46);
  int covered = 0;
  for (int t = 0; t < 40 && covered < 15; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const auto sf = scalar_functionals(rho, two.map, two.u);
    if (sf.kappa_abs_k() >= 1.0) continue;
    ++covered;
    const auto st = iterate(rho, two.map, IterationConfig::constant(two.u, 20));
    const auto series = nlwit::testing::series_partial_sums(sf, 20);
    for (size_t n = 0; n < series.size(); ++n) CHECK(std::abs(st.w_values[n] - series[n]) < 1e-9);

    const auto wi = w_infinity(rho, two.map, two.u);
    REQUIRE_FALSE(wi.diverged);
    // |w_n - w_inf| decreases monotonically toward the limit
    double prev = std::abs(st.w_values[0] - wi.value);
    for (size_t n = 1; n < st.w_values.size(); ++n) {
      const double cur = std::abs(st.w_values[n] - wi.value);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
  REQUIRE(covered >= 10);
}

TEST_CASE("c_n forms a geometric progression for constant involutive U") {
  const TwoQubitSetup two;
  auto rng = seeded_rng(47);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const auto sf = scalar_functionals(rho, two.map, two.u);
    const double ratio = std::pow(sf.kappa_abs_k(), 2.0);
    const auto st = iterate(rho, two.map, IterationConfig::constant(two.u, 8));
    for (size_t n = 2; n < st.c_values.size(); ++n) {
      if (st.c_values[n - 1] <= 1e-12) continue;
      CHECK(st.c_values[n] / st.c_values[n - 1] == Catch::Approx(ratio).epsilon(1e-8));
    }
  }
}

TEST_CASE("scale invariance of verdicts") {
  const TwoQubitSetup two;
  auto rng = seeded_rng(48);
  std::vector<DensityMatrix> probes;
  probes.push_back(bell_state(0));
  probes.push_back(phi_family(M_PI));
  probes.push_back(random_state({2, 2}, 5));
  probes.push_back(random_separable({2, 2}, 6, 4));
  for (double s : {0.5, 2.0}) {
    const LocalDecomposition sd = nlwit::testing::scaled(two.decomposition, s);
    const WitnessMap smap(assemble(sd), 2, 2);
    for (const auto& rho : probes) {
      const auto base = iterate(rho, two.map, IterationConfig::constant(two.u, 6));
      const auto scaled_st = iterate(rho, smap, IterationConfig::constant(two.u, 6));
      for (size_t n = 0; n < base.w_values.size(); ++n) {
        CHECK(scaled_st.w_values[n] == Catch::Approx(s * base.w_values[n]).margin(1e-10));
        if (n > 0) CHECK((scaled_st.w_values[n] < 0.0) == (base.w_values[n] < 0.0));
      }
      const auto sf = scalar_functionals(rho, two.map, two.u);
      const auto ssf = scalar_functionals(rho, smap, two.u);
      CHECK(ssf.kappa_abs_k() == Catch::Approx(sf.kappa_abs_k()).margin(1e-12));
      const auto wi = w_infinity(rho, two.map, two.u);
      const auto swi = w_infinity(rho, smap, two.u);
      CHECK(wi.diverged == swi.diverged);
      if (!wi.diverged) CHECK(swi.value == Catch::Approx(s * wi.value).margin(1e-10));
    }
  }
  (void)rng;
}

TEST_CASE("restricted path equals the full-state path when certified") {
  const TwoQubitSetup two;
  const auto cert = cert_for(two.decomposition, two.map, two.u);
  REQUIRE(cert.verdict == Verdict::analytic_accessible);
  auto rng = seeded_rng(49);
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix rho = random_state({2, 2}, rng());
    const auto v = expectation_vector(rho, two.decomposition);
    const auto full = iterate(rho, two.map, IterationConfig::constant(two.u, 6));
    const auto restricted = iterate_restricted(v, two.decomposition, two.map, IterationConfig::constant(two.u, 6), cert);
    for (size_t n = 0; n < full.w_values.size(); ++n)
      CHECK(std::abs(full.w_values[n] - restricted.w_values[n]) < 1e-9);

    const auto wi_full = w_infinity(rho, two.map, two.u);
    const auto wi_res = w_infinity_restricted(v, two.decomposition, two.map, two.u, cert);
    CHECK(wi_full.diverged == wi_res.diverged);
    if (!wi_full.diverged) CHECK(std::abs(wi_full.value - wi_res.value) < 1e-9);
  }

  const SmolinSetup smolin;
  const auto scert = cert_for(smolin.decomposition, smolin.map, smolin.u);
  REQUIRE(scert.verdict == Verdict::analytic_accessible);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho = random_state({4, 4}, 100 + static_cast<std::uint64_t>(t));
    const auto v = expectation_vector(rho, smolin.decomposition);
    const auto full = iterate(rho, smolin.map, IterationConfig::constant(smolin.u, 5));
    const auto restricted =
        iterate_restricted(v, smolin.decomposition, smolin.map, IterationConfig::constant(smolin.u, 5), scert);
    for (size_t n = 0; n < full.w_values.size(); ++n)
      CHECK(std::abs(full.w_values[n] - restricted.w_values[n]) < 1e-9);
  }

  // the exact Bell vector reproduces the pinned sequence without the state
  ExpectationVector vb;
  vb.values = {1.0, 1.0, -1.0, 1.0};
  const auto st = iterate_restricted(vb, two.decomposition, two.map, IterationConfig::constant(two.u, 3), cert);
  CHECK(st.w_values[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(st.w_values[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(st.w_values[2] == Catch::Approx(-0.5).margin(1e-12));
  CHECK(st.w_values[3] == Catch::Approx(-2.5).margin(1e-12));
}

TEST_CASE("restricted path refuses without a certificate") {
  const TwoQubitSetup two;
  AccessibilityCertificate none;  // not certified
  ExpectationVector v;
  v.values = {1.0, 1.0, -1.0, 1.0};
  CHECK_THROWS_AS(
      iterate_restricted(v, two.decomposition, two.map, IterationConfig::constant(two.u, 2), none),
      std::domain_error);

  const auto cert = cert_for(two.decomposition, two.map, two.u);
  ExpectationVector short_v;
  short_v.values = {1.0, 1.0};
  CHECK_THROWS_AS(
      iterate_restricted(short_v, two.decomposition, two.map, IterationConfig::constant(two.u, 2), cert),
      std::invalid_argument);
}

TEST_CASE("documented convention limit: a separable state outside the guarantee") {
  // Under the unnormalized-projector convention the n >= 2 iterates are not
  // globally nonnegative on separable inputs. |y+,y+> is the canonical
  // counterexample for the two-qubit setup: (w0, w1, w2) = (1/2, 0, -1/2).
  const TwoQubitSetup two;
  Vec yplus(2);
  yplus << 1.0 / std::sqrt(2.0), cplx(0.0, 1.0) / std::sqrt(2.0);
  const DensityMatrix rho = product_state({yplus, yplus});
  const auto st = iterate(rho, two.map, IterationConfig::constant(two.u, 2));
  CHECK(st.w_values[0] == Catch::Approx(0.5).margin(1e-12));
  CHECK(st.w_values[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(st.w_values[2] == Catch::Approx(-0.5).margin(1e-12));
}

TEST_CASE("smolin iterates stay nonnegative on fully product separable states") {
  const SmolinSetup smolin;
  auto rng = seeded_rng(50);
  for (int t = 0; t < 120; ++t) {
    const DensityMatrix sep = random_separable({2, 2, 2, 2}, rng(), 1 + static_cast<int>(rng() % 8));
    const DensityMatrix ab(Operator(sep.mat(), std::vector<int>{4, 4}));
    const auto st = iterate(ab, smolin.map, IterationConfig::constant(smolin.u, 10));
    for (double w : st.w_values) CHECK(w >= -1e-9);
  }
}

TEST_CASE("iteration config validation") {
  const TwoQubitSetup two;
  IterationConfig cfg;
  cfg.n_max = 2;
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);  // empty U sequence

  cfg.u_sequence.push_back(swap_op(2));
  cfg.u_sequence.push_back(Operator(pauli_string("ZZ").mat, {2, 2}));
  cfg.n_max = 3;
  CHECK_THROWS_AS(cfg.validate(2), std::invalid_argument);  // sequence shorter than n_max

  cfg.n_max = 2;
  CHECK_NOTHROW(cfg.validate(2));
  CHECK_NOTHROW(iterate(bell_state(0), two.map, cfg));

  Mat notu = 2.0 * Mat::Identity(4, 4);
  IterationConfig bad = IterationConfig::constant(Operator(notu, {2, 2}), 2);
  CHECK_THROWS_AS(bad.validate(2), std::domain_error);
}
