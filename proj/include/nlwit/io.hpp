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

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlwit/accessibility.hpp"
#include "nlwit/states.hpp"
#include "nlwit/witness.hpp"

namespace nlwit {

using json = nlohmann::json;

/// Configuration-level failure (bad file, malformed JSON, bad field). The
/// CLI maps this to its config-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Locale-independent shortest-round-trip decimal representation.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Witness decomposition files
// ---------------------------------------------------------------------------

inline Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError("field '" + field + "': expected a matrix (array of rows)");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError("field '" + field + "': empty matrix row");
  Mat m(static_cast<long>(rows), static_cast<long>(cols));
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("field '" + field + "': ragged matrix");
    for (size_t c = 0; c < cols; ++c) {
      const json& e = j[r][c];
      if (e.is_number()) {
        m(static_cast<long>(r), static_cast<long>(c)) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(static_cast<long>(r), static_cast<long>(c)) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError("field '" + field + "': entries must be numbers or [re,im] pairs");
      }
    }
  }
  return m;
}

inline bool is_pauli_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') return false;
  return true;
}

inline Operator observable_from_json(const json& j, int dim, const std::string& field) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (!is_pauli_label(s)) throw ConfigError("field '" + field + "': not a Pauli string");
    Operator o = pauli_string(s);
    if (o.dim() != dim)
      throw ConfigError("field '" + field + "': Pauli string dimension " + std::to_string(o.dim()) +
                        " does not match declared dim " + std::to_string(dim));
    return o;
  }
  Mat m = matrix_from_json(j, field);
  if (m.rows() != dim || m.cols() != dim)
    throw ConfigError("field '" + field + "': matrix dimension does not match declared dim");
  return Operator(std::move(m), {dim});
}

inline LocalDecomposition decomposition_from_json(const json& j) {
  LocalDecomposition d;
  if (!j.is_object()) throw ConfigError("witness file: expected a JSON object");
  for (const char* f : {"dA", "dB", "terms"})
    if (!j.contains(f)) throw ConfigError(std::string("witness file: missing field '") + f + "'");
  if (!j["dA"].is_number_integer() || !j["dB"].is_number_integer())
    throw ConfigError("witness file: fields 'dA'/'dB' must be integers");
  d.dA = j["dA"].get<int>();
  d.dB = j["dB"].get<int>();
  if (!j["terms"].is_array() || j["terms"].empty())
    throw ConfigError("witness file: field 'terms' must be a non-empty array");
  for (size_t i = 0; i < j["terms"].size(); ++i) {
    const json& t = j["terms"][i];
    const std::string where = "terms[" + std::to_string(i) + "]";
    if (!t.is_object()) throw ConfigError("witness file: " + where + " must be an object");
    for (const char* f : {"coeff", "A", "B"})
      if (!t.contains(f)) throw ConfigError("witness file: " + where + " missing field '" + f + "'");
    if (!t["coeff"].is_number()) throw ConfigError("witness file: " + where + ".coeff must be a number");
    WitnessTerm term;
    term.coeff = t["coeff"].get<double>();
    term.a = observable_from_json(t["A"], d.dA, where + ".A");
    term.b = observable_from_json(t["B"], d.dB, where + ".B");
    if (t["A"].is_string() && t["B"].is_string())
      term.label = t["A"].get<std::string>() + ":" + t["B"].get<std::string>();
    d.terms.push_back(std::move(term));
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("witness file: ") + e.what());
  }
  return d;
}

inline LocalDecomposition load_decomposition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open witness file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("witness file '" + path + "': " + e.what());
  }
  return decomposition_from_json(j);
}

inline json decomposition_to_json(const LocalDecomposition& d) {
  json terms = json::array();
  for (const auto& t : d.terms) {
    json jt{{"coeff", t.coeff}};
    if (!t.label.empty()) {
      const auto sep = t.label.find(':');
      jt["A"] = t.label.substr(0, sep);
      jt["B"] = t.label.substr(sep + 1);
    } else {
      auto mat_json = [](const Mat& m) {
        json rows = json::array();
        for (long r = 0; r < m.rows(); ++r) {
          json row = json::array();
          for (long c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
          rows.push_back(row);
        }
        return rows;
      };
      jt["A"] = mat_json(t.a.mat);
      jt["B"] = mat_json(t.b.mat);
    }
    terms.push_back(jt);
  }
  return json{{"dA", d.dA}, {"dB", d.dB}, {"terms", terms}};
}

// ---------------------------------------------------------------------------
// Built-in corpus decompositions
// ---------------------------------------------------------------------------

/// Two-qubit witness (1 + sum_a sigma_a ⊗ sigma_a)/4 = SWAP/2 as four
/// locally measured Pauli correlators.
inline LocalDecomposition w0_decomposition() {
  LocalDecomposition d;
  d.dA = d.dB = 2;
  for (const char* s : {"I", "X", "Y", "Z"}) {
    WitnessTerm t;
    t.coeff = 0.25;
    t.a = pauli_string(s);
    t.b = pauli_string(s);
    t.label = std::string(s) + ":" + s;
    d.terms.push_back(std::move(t));
  }
  return d;
}

/// Four-qubit witness (1 - sum_a sigma_a^{⊗4})/16 split across the 12|34
/// cut: A carries qubits 1,2 and B carries qubits 3,4.
inline LocalDecomposition smolin_decomposition() {
  LocalDecomposition d;
  d.dA = d.dB = 4;
  auto add = [&d](double coeff, const std::string& s) {
    WitnessTerm t;
    t.coeff = coeff;
    Operator a = pauli_string(s);
    t.a = Operator(std::move(a.mat), {4});
    Operator b = pauli_string(s);
    t.b = Operator(std::move(b.mat), {4});
    t.label = s + s + ":" + s + s;
    d.terms.push_back(std::move(t));
  };
  add(1.0 / 16.0, "II");
  add(-1.0 / 16.0, "XX");
  add(-1.0 / 16.0, "YY");
  add(-1.0 / 16.0, "ZZ");
  return d;
}

// ---------------------------------------------------------------------------
// State specs
// ---------------------------------------------------------------------------

inline StateSpec state_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw ConfigError("state spec: missing string field 'family'");
  const std::string fam = j["family"].get<std::string>();
  StateSpec s;
  auto need_number = [&](const char* f) {
    if (!j.contains(f) || !j[f].is_number()) throw ConfigError(std::string("state spec: missing numeric field '") + f + "'");
    return j[f].get<double>();
  };
  if (fam == "bell") {
    s.family = StateSpec::Family::bell;
    std::string which = j.value("which", "phi+");
    if (which == "phi+") s.bell_which = 0;
    else if (which == "phi-") s.bell_which = 1;
    else if (which == "psi+") s.bell_which = 2;
    else if (which == "psi-") s.bell_which = 3;
    else throw ConfigError("state spec: field 'which' must be one of phi+ phi- psi+ psi-");
  } else if (fam == "phi_family") {
    s.family = StateSpec::Family::phi_family;
    s.phi = need_number("phi");
    if (j.contains("pure_weight")) s.pure_weight = need_number("pure_weight");
  } else if (fam == "smolin") {
    s.family = StateSpec::Family::smolin;
    s.p = need_number("p");
    if (s.p < 0.0 || s.p > 1.0) throw ConfigError("state spec: field 'p' out of range [0,1]");
  } else if (fam == "product") {
    s.family = StateSpec::Family::product;
    if (!j.contains("kets") || !j["kets"].is_array() || j["kets"].empty())
      throw ConfigError("state spec: field 'kets' must be a non-empty array");
    for (const auto& kj : j["kets"]) {
      if (!kj.is_array() || kj.empty()) throw ConfigError("state spec: each ket must be a non-empty array");
      Vec k(static_cast<long>(kj.size()));
      for (size_t i = 0; i < kj.size(); ++i) {
        const auto& e = kj[i];
        if (e.is_number()) k(static_cast<long>(i)) = e.get<double>();
        else if (e.is_array() && e.size() == 2) k(static_cast<long>(i)) = cplx(e[0].get<double>(), e[1].get<double>());
        else throw ConfigError("state spec: ket entries must be numbers or [re,im] pairs");
      }
      s.kets.push_back(std::move(k));
    }
  } else if (fam == "random_separable" || fam == "random_state") {
    s.family = fam == "random_separable" ? StateSpec::Family::random_separable : StateSpec::Family::random_state;
    if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].empty())
      throw ConfigError("state spec: field 'dims' must be a non-empty array of ints");
    for (const auto& e : j["dims"]) {
      if (!e.is_number_integer()) throw ConfigError("state spec: field 'dims' must contain integers");
      s.dims.push_back(e.get<int>());
    }
    s.seed = j.value("seed", 0ULL);
    if (j.contains("mixture_size")) s.mixture_size = j["mixture_size"].get<int>();
  } else {
    throw ConfigError("state spec: unknown family '" + fam + "'");
  }
  return s;
}

inline StateSpec state_spec_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state spec: ") + e.what());
  }
  return state_spec_from_json(j);
}

inline json state_spec_to_json(const StateSpec& s) {
  switch (s.family) {
    case StateSpec::Family::bell: {
      static const char* names[] = {"phi+", "phi-", "psi+", "psi-"};
      return json{{"family", "bell"}, {"which", names[s.bell_which]}};
    }
    case StateSpec::Family::phi_family:
      return json{{"family", "phi_family"}, {"phi", s.phi}, {"pure_weight", s.pure_weight}};
    case StateSpec::Family::smolin:
      return json{{"family", "smolin"}, {"p", s.p}};
    case StateSpec::Family::product: {
      json kets = json::array();
      for (const auto& k : s.kets) {
        json kj = json::array();
        for (long i = 0; i < k.size(); ++i) kj.push_back({k(i).real(), k(i).imag()});
        kets.push_back(kj);
      }
      return json{{"family", "product"}, {"kets", kets}};
    }
    case StateSpec::Family::random_separable:
      return json{{"family", "random_separable"}, {"dims", s.dims}, {"seed", s.seed}, {"mixture_size", s.mixture_size}};
    case StateSpec::Family::random_state:
      return json{{"family", "random_state"}, {"dims", s.dims}, {"seed", s.seed}};
  }
  return json{};
}

// ---------------------------------------------------------------------------
// Unitary specs
// ---------------------------------------------------------------------------

/// "swap_AA'" (the default), a Pauli string over the AA' qubits, or an
/// explicit JSON matrix.
inline Operator unitary_from_spec(const std::string& spec, int dA) {
  const long dd = static_cast<long>(dA) * dA;
  if (spec == "swap_AA'" || spec == "swap") return swap_op(dA);
  if (is_pauli_label(spec)) {
    Operator u = pauli_string(spec);
    if (u.dim() != dd)
      throw ConfigError("unitary spec: Pauli string '" + spec + "' has dimension " + std::to_string(u.dim()) +
                        ", expected " + std::to_string(dd));
    return Operator(std::move(u.mat), {dA, dA});
  }
  json j;
  try {
    j = json::parse(spec);
  } catch (const json::exception&) {
    throw ConfigError("unitary spec: '" + spec + "' is neither swap_AA', a Pauli string, nor a JSON matrix");
  }
  Mat m = matrix_from_json(j, "unitary");
  if (m.rows() != dd) throw ConfigError("unitary spec: matrix dimension must be dA*dA");
  if (!is_unitary(m)) throw std::domain_error("unitary spec: matrix is not unitary within tolerance");
  return Operator(std::move(m), {dA, dA});
}

// ---------------------------------------------------------------------------
// Certificate serialization
// ---------------------------------------------------------------------------

inline json certificate_to_json(const AccessibilityCertificate& cert) {
  return json{
      {"verdict", to_string(cert.verdict)},
      {"v_dim", cert.v_dim},
      {"v_prime_dim", static_cast<int>(cert.v_prime_basis.size())},
      {"checks",
       {{"identity_in_V_prime", cert.checks.identity_in_v_prime},
        {"U_in_V_prime", cert.checks.u_in_v_prime},
        {"algebra_closed", cert.checks.algebra_closed},
        {"images_in_V",
         {{"Lambda_identity", cert.checks.image_identity},
          {"Lambda_U", cert.checks.image_u},
          {"Lambda_PU", cert.checks.image_pu},
          {"Lambda_P", cert.checks.image_p}}}}},
      {"residuals",
       {{"identity_in_V_prime", cert.residuals.identity_in_v_prime},
        {"U_in_V_prime", cert.residuals.u_in_v_prime},
        {"algebra_closed", cert.residuals.algebra_closed},
        {"Lambda_identity", cert.residuals.image_identity},
        {"Lambda_U", cert.residuals.image_u},
        {"Lambda_PU", cert.residuals.image_pu},
        {"Lambda_P", cert.residuals.image_p}}}};
}

}  // namespace nlwit
