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

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nlwit/engine.hpp"
#include "nlwit/io.hpp"
#include "nlwit/stats.hpp"

namespace {

using nlwit::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNotCertified = 4;

struct Options {
  std::string witness_path;
  std::string state_json;
  std::string unitary_spec = "swap_AA'";
  std::string preset;
  std::string scan_spec;
  std::string out_path;
  std::string format;
  int n_max = 3;
  int shots = 1000;
  int trials = 200;
  std::uint64_t seed = 1;
};

struct ScanAxis {
  std::string axis;  // "phi" or "p"
  double start = 0.0, end = 0.0;
  int steps = 0;
};

ScanAxis parse_scan(const std::string& spec) {
  ScanAxis s;
  std::stringstream ss(spec);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 4) throw nlwit::ConfigError("--scan expects axis:start:end:steps");
  s.axis = parts[0];
  if (s.axis != "phi" && s.axis != "p") throw nlwit::ConfigError("--scan axis must be 'phi' or 'p'");
  try {
    s.start = std::stod(parts[1]);
    s.end = std::stod(parts[2]);
    s.steps = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw nlwit::ConfigError("--scan has non-numeric bounds or steps");
  }
  if (s.steps < 2) throw nlwit::ConfigError("--scan needs steps >= 2");
  return s;
}

struct Resolved {
  nlwit::LocalDecomposition decomposition;
  std::string witness_source;  // file path or builtin name
  nlwit::WitnessMap map;
  nlwit::Operator u;
  std::optional<nlwit::StateSpec> state;
  std::optional<ScanAxis> scan;
  Options opts;

  json config_json(const std::string& command) const {
    json cfg{{"command", command},
             {"witness", {{"source", witness_source}, {"decomposition", nlwit::decomposition_to_json(decomposition)}}},
             {"unitary", opts.unitary_spec},
             {"n_max", opts.n_max},
             {"seed", opts.seed},
             {"format", opts.format.empty() ? "default" : opts.format},
             {"out", opts.out_path.empty() ? "stdout" : opts.out_path}};
    if (state) cfg["state"] = nlwit::state_spec_to_json(*state);
    if (scan) cfg["scan"] = {{"axis", scan->axis}, {"start", scan->start}, {"end", scan->end}, {"steps", scan->steps}};
    if (command == "simulate") {
      cfg["shots"] = opts.shots;
      cfg["trials"] = opts.trials;
    }
    return cfg;
  }
};

Resolved resolve(const Options& opts, bool needs_state) {
  nlwit::LocalDecomposition d;
  std::string source;
  if (opts.preset == "fig1") {
    d = nlwit::w0_decomposition();
    source = "builtin:two-qubit-swap-witness";
  } else if (opts.preset == "fig2") {
    d = nlwit::smolin_decomposition();
    source = "builtin:smolin-witness";
  } else if (!opts.preset.empty()) {
    throw nlwit::ConfigError("unknown preset '" + opts.preset + "' (expected fig1 or fig2)");
  }
  if (!opts.witness_path.empty()) {
    d = nlwit::load_decomposition(opts.witness_path);
    source = opts.witness_path;
  }
  if (d.terms.empty()) throw nlwit::ConfigError("no witness given: use --witness <file> or --preset fig1|fig2");

  const int dA = d.dA, dB = d.dB;
  nlwit::Operator w = nlwit::assemble(d);
  Resolved r{std::move(d), std::move(source), nlwit::WitnessMap(w, dA, dB),
             nlwit::unitary_from_spec(opts.unitary_spec, dA), std::nullopt, std::nullopt, opts};

  if (!opts.scan_spec.empty()) {
    r.scan = parse_scan(opts.scan_spec);
  } else if (!opts.preset.empty() && opts.state_json.empty() && opts.scan_spec.empty()) {
    // presets default to the figure scans
    r.scan = parse_scan(opts.preset == "fig1" ? "phi:0:6.283185307179586:101" : "p:0:1:101");
  }

  if (!opts.state_json.empty()) {
    r.state = nlwit::state_spec_from_string(opts.state_json);
  } else if (needs_state && !r.scan) {
    if (opts.preset == "fig1") {
      nlwit::StateSpec s;
      s.family = nlwit::StateSpec::Family::bell;
      r.state = s;
    } else if (opts.preset == "fig2") {
      nlwit::StateSpec s;
      s.family = nlwit::StateSpec::Family::smolin;
      s.p = 0.0;
      r.state = s;
    } else {
      throw nlwit::ConfigError("no state given: use --state '<json>'");
    }
  }
  return r;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw nlwit::ConfigError("cannot open output file '" + out_path + "'");
  out << text;
}

json w_infinity_json(const nlwit::WInfinity& wi) {
  json j{{"diverged", wi.diverged}};
  if (wi.diverged) {
    j["value"] = nullptr;
    j["floor_crossing_n"] = wi.floor_crossing_n;
  } else {
    j["value"] = wi.value;
    j["floor_crossing_n"] = nullptr;
  }
  return j;
}

int cmd_eval(const Options& opts) {
  Resolved r = resolve(opts, /*needs_state=*/true);
  if (!r.state) throw nlwit::ConfigError("eval needs --state (or a preset default)");
  const nlwit::DensityMatrix rho = nlwit::make(*r.state);

  const auto cert = nlwit::check_analytic(r.decomposition, r.map, r.u);
  const auto cfg = nlwit::IterationConfig::constant(r.u, opts.n_max);
  const auto st = nlwit::iterate(rho, r.map, cfg);
  const auto wi = nlwit::w_infinity(rho, r.map, r.u);
  const auto sf = nlwit::scalar_functionals(rho, r.map, r.u);

  json out{{"config", r.config_json("eval")},
           {"kappa_inv", sf.kappa_inv},
           {"kappa", 1.0 / sf.kappa_inv},
           {"k_abs", std::abs(sf.k)},
           {"c_abs", std::abs(sf.c)},
           {"d_abs", std::abs(sf.d)},
           {"kappa_abs_k", sf.kappa_abs_k()},
           {"w_values", st.w_values},
           {"w_infinity", w_infinity_json(wi)},
           {"detected_linear", st.w_values.front() < 0.0},
           {"detected_nonlinear", wi.diverged || (!std::isnan(wi.value) && wi.value < 0.0)},
           {"certificate", nlwit::certificate_to_json(cert)}};

  if (opts.format == "text") {
    std::ostringstream ss;
    ss << "w values:";
    for (double w : st.w_values) ss << ' ' << nlwit::format_double(w);
    ss << '\n';
    if (wi.diverged)
      ss << "w_infinity: diverges (w_n < floor at n = " << wi.floor_crossing_n << ")\n";
    else
      ss << "w_infinity: " << nlwit::format_double(wi.value) << '\n';
    ss << "kappa_inv: " << nlwit::format_double(sf.kappa_inv) << "  |k|: " << nlwit::format_double(std::abs(sf.k))
       << "  |c|: " << nlwit::format_double(std::abs(sf.c)) << "  |d|: " << nlwit::format_double(std::abs(sf.d))
       << '\n';
    ss << "certificate: " << nlwit::to_string(cert.verdict) << '\n';
    write_output(opts.out_path, ss.str());
  } else {
    write_output(opts.out_path, out.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_scan(const Options& opts) {
  Resolved r = resolve(opts, /*needs_state=*/false);
  if (!r.scan) throw nlwit::ConfigError("scan needs --scan axis:start:end:steps (or a preset)");
  const ScanAxis& ax = *r.scan;

  const auto cfg_json = r.config_json("scan");
  std::cerr << "config: " << cfg_json.dump() << '\n';

  struct Row {
    double param, w_linear, w_1;
    nlwit::WInfinity wi;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<size_t>(ax.steps));
  for (int i = 0; i < ax.steps; ++i) {
    const double param = ax.start + (ax.end - ax.start) * i / (ax.steps - 1);
    nlwit::StateSpec spec;
    if (ax.axis == "phi") {
      spec.family = nlwit::StateSpec::Family::phi_family;
      spec.phi = param;
    } else {
      spec.family = nlwit::StateSpec::Family::smolin;
      spec.p = param;
    }
    const nlwit::DensityMatrix rho = nlwit::make(spec);
    const auto v = nlwit::expectation_vector(rho, r.decomposition);
    Row row{param, nlwit::linear_witness_value(v, r.decomposition), nlwit::w_nl_first(rho, r.map, r.u),
            nlwit::w_infinity(rho, r.map, r.u)};
    rows.push_back(row);
  }

  if (opts.format == "json") {
    json jrows = json::array();
    for (const Row& row : rows) {
      jrows.push_back({{"param", row.param},
                       {"w_linear", row.w_linear},
                       {"w_1", row.w_1},
                       {"w_inf", row.wi.diverged ? json(nullptr) : json(row.wi.value)},
                       {"diverged", row.wi.diverged ? 1 : 0},
                       {"detected_linear", row.w_linear < 0.0 ? 1 : 0},
                       {"detected_nonlinear", (row.wi.diverged || row.wi.value < 0.0) ? 1 : 0}});
    }
    write_output(opts.out_path, json{{"config", cfg_json}, {"rows", jrows}}.dump(2) + "\n");
    return kExitOk;
  }

  std::ostringstream csv;
  csv << "param,w_linear,w_1,w_inf,diverged,detected_linear,detected_nonlinear\n";
  for (const Row& row : rows) {
    csv << nlwit::format_double(row.param) << ',' << nlwit::format_double(row.w_linear) << ','
        << nlwit::format_double(row.w_1) << ',';
    if (!row.wi.diverged) csv << nlwit::format_double(row.wi.value);
    csv << ',' << (row.wi.diverged ? 1 : 0) << ',' << (row.w_linear < 0.0 ? 1 : 0) << ','
        << ((row.wi.diverged || row.wi.value < 0.0) ? 1 : 0) << '\n';
  }
  write_output(opts.out_path, csv.str());
  return kExitOk;
}

int cmd_check_access(const Options& opts) {
  Resolved r = resolve(opts, /*needs_state=*/false);

  nlwit::AccessibilityCertificate combined = nlwit::check_sufficient(r.decomposition, r.map, r.u);
  const nlwit::Verdict sufficient_verdict = combined.verdict;
  bool analytic = false;
  if (nlwit::is_involution(r.u.mat)) {
    const auto acert = nlwit::check_analytic(r.decomposition, r.map, r.u);
    analytic = acert.verdict == nlwit::Verdict::analytic_accessible;
  }
  combined.verdict = analytic ? nlwit::Verdict::analytic_accessible : nlwit::Verdict::not_certified;

  json out{{"config", r.config_json("check-access")}, {"certificate", nlwit::certificate_to_json(combined)}};
  out["certificate"]["sufficient_condition_verdict"] = nlwit::to_string(sufficient_verdict);
  out["certificate"]["U_involutive"] = nlwit::is_involution(r.u.mat);
  write_output(opts.out_path, out.dump(2) + "\n");
  return analytic ? kExitOk : kExitNotCertified;
}

int cmd_simulate(const Options& opts) {
  Resolved r = resolve(opts, /*needs_state=*/true);
  if (!r.state) throw nlwit::ConfigError("simulate needs --state (or a preset default)");
  if (opts.shots < 1 || opts.trials < 1) throw nlwit::ConfigError("simulate needs --shots >= 1 and --trials >= 1");
  const nlwit::DensityMatrix rho = nlwit::make(*r.state);

  const auto cert = nlwit::check_analytic(r.decomposition, r.map, r.u);
  const auto cfg = nlwit::IterationConfig::constant(r.u, opts.n_max);

  const auto rec = nlwit::simulate_expectations(rho, r.decomposition, opts.shots, opts.seed);
  const auto prop = nlwit::propagate(rec, r.decomposition, r.map, cfg, cert);
  const auto rates = nlwit::detection_rate(rho, r.decomposition, r.map, cfg, opts.shots, opts.trials, opts.seed, cert);

  json estimates = json::array();
  for (size_t i = 0; i < rec.estimates.values.size(); ++i) {
    json e{{"term", r.decomposition.terms[i].label.empty() ? std::to_string(i) : r.decomposition.terms[i].label},
           {"estimate", rec.estimates.values[i]},
           {"stderr", rec.stderrs[i]}};
    estimates.push_back(e);
  }
  json wrows = json::array();
  for (size_t n = 0; n < prop.w_values.size(); ++n) {
    json e{{"n", n}, {"estimate", prop.w_values[n]}, {"stderr", prop.w_stderrs[n]}};
    if (prop.w_stderrs[n] > 0.0) e["significance"] = std::abs(prop.w_values[n]) / prop.w_stderrs[n];
    wrows.push_back(e);
  }
  json winf;
  if (prop.w_infinity_diverged) {
    winf = {{"diverged", true}};
  } else if (prop.w_infinity_value) {
    winf = {{"diverged", false}, {"estimate", *prop.w_infinity_value}};
    if (prop.w_infinity_stderr) {
      winf["stderr"] = *prop.w_infinity_stderr;
      if (*prop.w_infinity_stderr > 0.0)
        winf["significance"] = std::abs(*prop.w_infinity_value) / *prop.w_infinity_stderr;
    }
  }

  json out{{"config", r.config_json("simulate")},
           {"record", {{"shots", rec.shots}, {"seed", rec.seed}, {"estimates", estimates}}},
           {"w", wrows},
           {"w_infinity", winf},
           {"rates",
            {{"linear", rates.linear_rate},
             {"nonlinear", rates.nonlinear_rate},
             {"trials", rates.trials},
             {"dominance_violations", rates.dominance_violations}}}};
  write_output(opts.out_path, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear entanglement witness toolkit"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--witness", opts.witness_path, "Witness decomposition JSON file");
    sub->add_option("--state", opts.state_json, "State spec JSON, e.g. '{\"family\":\"smolin\",\"p\":0.5}'");
    sub->add_option("--unitary", opts.unitary_spec, "swap_AA' | Pauli string | JSON matrix");
    sub->add_option("--n", opts.n_max, "Iteration count");
    sub->add_option("--seed", opts.seed, "RNG seed");
    sub->add_option("--out", opts.out_path, "Output file (default stdout)");
    sub->add_option("--format", opts.format, "csv|json|text");
    sub->add_option("--preset", opts.preset, "fig1|fig2 built-in configurations");
  };

  CLI::App* eval = app.add_subcommand("eval", "Evaluate witness values for one state");
  add_common(eval);
  CLI::App* scan = app.add_subcommand("scan", "Parameter sweep, emits plot-ready data");
  add_common(scan);
  scan->add_option("--scan", opts.scan_spec, "axis:start:end:steps with axis phi|p");
  CLI::App* check = app.add_subcommand("check-access", "Certify accessibility of the nonlinear extension");
  add_common(check);
  CLI::App* sim = app.add_subcommand("simulate", "Finite-shot simulation with error propagation");
  add_common(sim);
  sim->add_option("--shots", opts.shots, "Shots per observable");
  sim->add_option("--trials", opts.trials, "Monte-Carlo trials for detection rates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (eval->parsed()) return cmd_eval(opts);
    if (scan->parsed()) return cmd_scan(opts);
    if (check->parsed()) return cmd_check_access(opts);
    if (sim->parsed()) return cmd_simulate(opts);
    std::cerr << "error: no subcommand\n";
    return kExitConfig;
  } catch (const nlwit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
