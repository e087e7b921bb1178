// Copyright 2026 The clustersim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end: runs the cavity-QED and atomic-ensemble cluster
// protocols, parameter sweeps, and state-file verification, emitting
// machine-readable JSON/CSV reports.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clustersim/cavity_qed.hpp"
#include "clustersim/cluster_verify.hpp"
#include "clustersim/ensembles.hpp"
#include "clustersim/version.hpp"

using json = nlohmann::ordered_json;
using namespace clustersim;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_report(const json& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << report.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string sig6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string sig12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct CavityParams {
  int n = 2;
  double kappa = 0.0;
  double tau = 0.0;
  double offset = 0.0;
  std::string early_atom = "low";
  double g2_ratio = kCanonicalG2Ratio;
};

struct CavityOutcome {
  double fidelity;
  double probability;
  json per_stage;
};

CavityOutcome run_cavity(const CavityParams& p) {
  StageConfig cfg = StageConfig::canonical(p.kappa, p.tau);
  cfg.g2 = p.g2_ratio * cfg.g1;
  cfg.validate();
  json stages = json::array();
  if (p.offset == 0.0) {
    ChainResult r = run_chain(p.n, cfg);
    for (std::size_t k = 0; k < r.per_stage.size(); ++k) {
      stages.push_back({{"stage", k + 1},
                        {"pair", {chain_atom_label(int(k) + 1), chain_atom_label(int(k) + 2)}},
                        {"survival_probability", r.per_stage[k].survival_probability},
                        {"cavity_leakage", r.per_stage[k].cavity_leakage}});
    }
    return {r.fidelity, r.success_probability, std::move(stages)};
  }
  StateVector reg = chain_initial_state(p.n);
  double prob = 1.0;
  double two_atom_fidelity = 0.0;
  for (int j = 1; j < p.n; ++j) {
    const std::pair<std::string, std::string> pair{chain_atom_label(j), chain_atom_label(j + 1)};
    const std::string early = p.early_atom == "low" ? pair.first : pair.second;
    TimingOffsetResult r = timing_offset_stage(reg, pair, cfg, p.offset, early);
    prob *= r.survival_probability;
    stages.push_back({{"stage", j},
                      {"pair", {pair.first, pair.second}},
                      {"survival_probability", r.survival_probability},
                      {"cavity_leakage", r.cavity_leakage},
                      {"stage_fidelity", r.fidelity},
                      {"early_atom", early}});
    two_atom_fidelity = r.fidelity;
    reg = std::move(r.state);
  }
  const double fid = p.n == 2 ? two_atom_fidelity : cluster_fidelity(reg, p.n);
  return {fid, prob, std::move(stages)};
}

int cmd_cavity(const CavityParams& p, const std::string& output, bool no_timestamp) {
  CavityOutcome r = run_cavity(p);
  json report;
  report["scheme"] = "cavity";
  report["inputs"] = {{"n", p.n},
                      {"kappa", p.kappa},
                      {"tau", p.tau},
                      {"offset_fraction", p.offset},
                      {"early_atom", p.early_atom},
                      {"g2_ratio", p.g2_ratio},
                      {"t", kPi},
                      {"n_max", 2}};
  report["fidelity"] = r.fidelity;
  report["success_probability"] = r.probability;
  report["per_stage"] = r.per_stage;
  if (p.offset != 0.0)
    report["convention"] =
        "offset fidelity reduced over cavity Fock states against the ideal stage image; "
        "early atom = " + p.early_atom + "-index of each pair";
  report["tool_version"] = kVersion;
  if (!no_timestamp) report["timestamp"] = utc_timestamp();
  write_report(report, output);
  std::cout << "fidelity            = " << sig6(r.fidelity) << "\n"
            << "success_probability = " << sig6(r.probability) << "\n";
  return 0;
}

int cmd_ensemble(int n, const std::string& mode, std::optional<std::uint64_t> seed,
                 const std::string& output, bool no_timestamp) {
  const GateMode gm =
      mode == "measurement-based" ? GateMode::measurement_based : GateMode::abstract_gate;
  PipelineResult r = build_cluster_ensembles(n, gm, seed);
  json report;
  report["scheme"] = "ensemble";
  report["inputs"] = {{"n", n}, {"mode", mode}};
  if (seed) report["inputs"]["seed"] = *seed;
  report["fidelity"] = r.fidelity;
  report["success_probability"] = r.success_probability;
  report["per_stage"] = r.log;
  report["tool_version"] = kVersion;
  if (!no_timestamp) report["timestamp"] = utc_timestamp();
  write_report(report, output);
  std::cout << "fidelity            = " << sig6(r.fidelity) << "\n"
            << "success_probability = " << sig6(r.success_probability) << "\n";
  return 0;
}

// --- sweep specification -----------------------------------------------
//
// Line-based key = value file; '#' starts a comment. Keys:
//   parameter = kappa | tau | offset_fraction | g2_ratio | N   (required)
//   values   = v1, v2, ...      (this or linspace, required)
//   linspace = start, stop, count
//   scheme   = cavity            (optional; only cavity is supported)
//   n, kappa, tau, offset_fraction, g2_ratio, early_atom       (overrides)

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  CavityParams base;
};

[[noreturn]] void spec_error(int line, int column, const std::string& msg) {
  std::ostringstream os;
  os << "sweep spec line " << line << ", column " << column << ": " << msg;
  throw std::runtime_error(os.str());
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& text, int line, int column) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) spec_error(line, column, "empty entry in number list");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      spec_error(line, column, "not a number: '" + item + "'");
    }
    if (used != item.size()) spec_error(line, column, "trailing characters in '" + item + "'");
    if (!std::isfinite(v)) spec_error(line, column, "values must be finite");
    out.push_back(v);
  }
  return out;
}

SweepSpec parse_sweep_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep spec '" + path + "'");
  SweepSpec spec;
  bool have_values = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) spec_error(lineno, 1, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const int vcol = static_cast<int>(eq) + 2;
    if (value.empty()) spec_error(lineno, vcol, "missing value for '" + key + "'");
    if (key == "scheme") {
      if (value != "cavity") spec_error(lineno, vcol, "only scheme = cavity is supported");
    } else if (key == "parameter") {
      static const std::vector<std::string> allowed{"kappa", "tau", "offset_fraction",
                                                    "g2_ratio", "N"};
      if (std::find(allowed.begin(), allowed.end(), value) == allowed.end())
        spec_error(lineno, vcol, "unknown sweep parameter '" + value + "'");
      spec.parameter = value;
    } else if (key == "values") {
      spec.values = parse_number_list(value, lineno, vcol);
      if (spec.values.empty()) spec_error(lineno, vcol, "values list is empty");
      have_values = true;
    } else if (key == "linspace") {
      auto v = parse_number_list(value, lineno, vcol);
      if (v.size() != 3) spec_error(lineno, vcol, "linspace needs start, stop, count");
      const int count = static_cast<int>(v[2]);
      if (count < 2 || v[2] != count) spec_error(lineno, vcol, "linspace count must be an integer >= 2");
      spec.values.clear();
      for (int k = 0; k < count; ++k)
        spec.values.push_back(v[0] + (v[1] - v[0]) * k / (count - 1));
      have_values = true;
    } else if (key == "n") {
      spec.base.n = static_cast<int>(std::stod(value));
    } else if (key == "kappa") {
      spec.base.kappa = std::stod(value);
    } else if (key == "tau") {
      spec.base.tau = std::stod(value);
    } else if (key == "offset_fraction") {
      spec.base.offset = std::stod(value);
    } else if (key == "g2_ratio") {
      spec.base.g2_ratio = std::stod(value);
    } else if (key == "early_atom") {
      if (value != "low" && value != "high")
        spec_error(lineno, vcol, "early_atom must be low or high");
      spec.base.early_atom = value;
    } else {
      spec_error(lineno, 1, "unknown key '" + key + "'");
    }
  }
  if (spec.parameter.empty()) throw std::runtime_error("sweep spec: missing 'parameter'");
  if (!have_values) throw std::runtime_error("sweep spec: missing 'values' or 'linspace'");
  return spec;
}

CavityParams point_params(const SweepSpec& spec, double value) {
  CavityParams p = spec.base;
  if (spec.parameter == "kappa") p.kappa = value;
  else if (spec.parameter == "tau") p.tau = value;
  else if (spec.parameter == "offset_fraction") p.offset = value;
  else if (spec.parameter == "g2_ratio") p.g2_ratio = value;
  else if (spec.parameter == "N") {
    if (value != std::floor(value)) throw std::runtime_error("sweep: N values must be integers");
    p.n = static_cast<int>(value);
  }
  return p;
}

int cmd_sweep(const std::string& spec_path, const std::string& output) {
  SweepSpec spec = parse_sweep_spec(spec_path);
  std::vector<std::string> rows;
  for (double value : spec.values) {
    CavityParams p = point_params(spec, value);
    CavityOutcome r = run_cavity(p);
    std::ostringstream row;
    row << p.n << ',' << sig12(p.kappa) << ',' << sig12(p.tau) << ',' << sig12(p.offset) << ','
        << sig12(p.g2_ratio) << ',' << sig12(r.fidelity) << ',' << sig12(r.probability);
    rows.push_back(row.str());
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + output + "'");
  out << "n,kappa,tau,offset_fraction,g2_ratio,fidelity,success_probability\n";
  for (const auto& row : rows) out << row << '\n';
  if (!out) throw std::runtime_error("failed writing '" + output + "'");
  std::cout << "wrote " << rows.size() << " rows to " << output << "\n";
  return 0;
}

int cmd_verify(const std::string& state_path) {
  std::ifstream in(state_path);
  if (!in) throw std::runtime_error("cannot open state file '" + state_path + "'");
  json doc = json::parse(in);
  std::vector<Factor> factors;
  for (const auto& f : doc.at("layout"))
    factors.push_back({f.at("label").get<std::string>(), f.at("dim").get<int>()});
  SubsystemLayout layout(factors);
  const auto& amps = doc.at("amplitudes");
  if (static_cast<long>(amps.size()) != layout.total_dimension())
    throw std::runtime_error("verify: amplitude count does not match layout");
  Vector v(layout.total_dimension());
  for (long k = 0; k < v.size(); ++k) {
    const auto& entry = amps[k];
    if (entry.is_array() && entry.size() == 2)
      v(k) = Complex(entry[0].get<double>(), entry[1].get<double>());
    else if (entry.is_number())
      v(k) = Complex(entry.get<double>(), 0.0);
    else
      throw std::runtime_error("verify: amplitudes must be numbers or [re, im] pairs");
  }
  StateVector state(layout, std::move(v));
  const int n = layout.factor_count();
  const double fid = cluster_fidelity(state, n);
  const auto exps = stabilizer_expectations(state, n);
  const auto signs = stabilizer_reference_signs(n);
  const std::string enc = layout.factor(0).dim == 3
                              ? encoding_name(QubitEncoding::atomic)
                              : "qubit";
  std::cout << "qubits              = " << n << "\n"
            << "encoding            = " << enc << "\n"
            << "cluster_fidelity    = " << sig6(fid) << "\n";
  for (int j = 0; j < n; ++j)
    std::cout << "K" << j + 1 << " expectation      = " << sig6(exps[j])
              << "  (ideal " << (signs[j] > 0 ? "+1" : "-1") << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-state generation simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // cavity
  CavityParams cavity;
  std::string cavity_out = "report.json";
  bool cavity_nots = false;
  auto* c = app.add_subcommand("cavity", "resonant cavity-QED chain with conditional decay");
  c->add_option("--n", cavity.n, "number of atoms")->check(CLI::Range(2, kDefaultMaxChainAtoms));
  c->add_option("--kappa", cavity.kappa, "cavity decay rate in units of g1")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--tau", cavity.tau, "atomic spontaneous emission rate in units of g1")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--offset", cavity.offset, "timing offset fraction of the stage time")
      ->check(CLI::Range(0.0, 0.999));
  c->add_option("--early-atom", cavity.early_atom, "which atom of each pair enters early")
      ->check(CLI::IsMember({"low", "high"}));
  c->add_option("--g2-ratio", cavity.g2_ratio, "g2/g1 (default sqrt 3)")
      ->check(CLI::PositiveNumber);
  c->add_option("-o,--output", cavity_out, "JSON report path");
  c->add_flag("--no-timestamp", cavity_nots, "omit the timestamp field (golden-file runs)");

  // ensemble
  int ens_n = 2;
  std::string ens_mode = "abstract";
  std::optional<std::uint64_t> ens_seed;
  std::string ens_out = "report.json";
  bool ens_nots = false;
  auto* e = app.add_subcommand("ensemble", "atomic-ensemble dual-rail cluster pipeline");
  e->add_option("--n", ens_n, "number of ensembles")->check(CLI::Range(2, 16));
  e->add_option("--mode", ens_mode, "CNOT realization")
      ->check(CLI::IsMember({"abstract", "measurement-based"}));
  e->add_option("--seed", ens_seed, "sample measurement branches with this seed");
  e->add_option("-o,--output", ens_out, "JSON report path");
  e->add_flag("--no-timestamp", ens_nots, "omit the timestamp field (golden-file runs)");

  // sweep
  std::string sweep_spec;
  std::string sweep_out = "sweep.csv";
  auto* s = app.add_subcommand("sweep", "run a parameter sweep from a spec file to CSV");
  s->add_option("spec", sweep_spec, "sweep specification file")->required();
  s->add_option("-o,--output", sweep_out, "CSV output path");

  // verify
  std::string verify_state;
  auto* v = app.add_subcommand("verify", "check a state file against the cluster target");
  v->add_option("state", verify_state, "JSON state file (layout header + amplitudes)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c->parsed()) return cmd_cavity(cavity, cavity_out, cavity_nots);
    if (e->parsed()) return cmd_ensemble(ens_n, ens_mode, ens_seed, ens_out, ens_nots);
    if (s->parsed()) return cmd_sweep(sweep_spec, sweep_out);
    if (v->parsed()) return cmd_verify(verify_state);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
