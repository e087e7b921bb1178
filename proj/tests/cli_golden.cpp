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
// Behavioral tests of the CLI binary (argv[1]): report contents, sweep
// grammar and error reporting, verify subcommand, exit codes.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_cli;
fs::path g_dir;

void check(bool ok, const std::string& what) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const fs::path out = g_dir / "stdout.txt";
  const int rc = std::system((g_cli + " " + args + " > " + out.string() + " 2>&1").c_str());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {rc == -1 ? -1 : WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void test_cavity_report() {
  const fs::path out = g_dir / "cavity.json";
  RunResult r = run("cavity --n 2 --kappa 0.1 --tau 0.1 --no-timestamp -o " + out.string());
  check(r.exit_code == 0, "cavity exits 0 when a report is written");
  check(r.stdout_text.find("fidelity") != std::string::npos &&
            r.stdout_text.find("0.993894") != std::string::npos,
        "cavity prints the decay fidelity to 6 significant digits");
  check(r.stdout_text.find("0.865201") != std::string::npos,
        "cavity prints the success probability to 6 significant digits");
  json doc = json::parse(slurp(out));
  check(doc.at("scheme") == "cavity", "report carries the scheme");
  check(doc.at("inputs").at("kappa") == 0.1, "report echoes inputs");
  check(std::abs(doc.at("fidelity").get<double>() - 0.993894284592977) < 1e-12,
        "report fidelity matches the closed form");
  check(doc.at("per_stage").size() == 1, "one per-stage record for n = 2");
  check(!doc.contains("timestamp"), "--no-timestamp omits the timestamp");
  check(doc.contains("tool_version"), "report carries the tool version");

  RunResult ts = run("cavity --n 2 -o " + (g_dir / "cavity_ts.json").string());
  json tdoc = json::parse(slurp(g_dir / "cavity_ts.json"));
  check(ts.exit_code == 0 && tdoc.contains("timestamp"), "timestamp present by default");
  check(std::abs(tdoc.at("fidelity").get<double>() - 1.0) < 1e-9 &&
            std::abs(tdoc.at("success_probability").get<double>() - 1.0) < 1e-9,
        "default run is the ideal case with unit fidelity and probability");
}

void test_cavity_offset_report() {
  const fs::path out = g_dir / "offset.json";
  RunResult r = run("cavity --n 2 --offset 0.01 --no-timestamp -o " + out.string());
  check(r.exit_code == 0, "offset run exits 0");
  json doc = json::parse(slurp(out));
  const double f = doc.at("fidelity").get<double>();
  check(f >= 0.997 && f <= 1.0 + 1e-12, "offset fidelity lies in the reported band");
  check(doc.contains("convention"), "offset report documents the fidelity convention");
  check(std::abs(f - 0.999) <= 2e-3, "offset fidelity lies within 0.002 of 0.999");
}

void test_ensemble_report() {
  const fs::path out = g_dir / "ens.json";
  RunResult r = run("ensemble --n 2 --mode abstract --no-timestamp -o " + out.string());
  check(r.exit_code == 0, "ensemble exits 0");
  json doc = json::parse(slurp(out));
  check(std::abs(doc.at("fidelity").get<double>() - 1.0) < 1e-10, "abstract mode fidelity 1");
  check(doc.at("success_probability") == 1.0, "abstract mode succeeds with certainty");

  RunResult mb = run("ensemble --n 2 --mode measurement-based --no-timestamp -o " +
                     (g_dir / "ens_mb.json").string());
  json mdoc = json::parse(slurp(g_dir / "ens_mb.json"));
  check(mb.exit_code == 0 && std::abs(mdoc.at("fidelity").get<double>() - 1.0) < 1e-10,
        "measurement-based mode keeps fidelity 1 on its branch");
  const double p = mdoc.at("success_probability").get<double>();
  check(std::abs(p - 1.0 / 1024.0) < 1e-13, "measurement-based probability itemizes to 1/1024");
  bool ghz_line = false;
  for (const auto& line : mdoc.at("per_stage"))
    ghz_line |= line.get<std::string>().find("ghz factors 0.25") != std::string::npos;
  check(ghz_line, "per-stage log itemizes the GHZ post-selection factors");
}

void test_sweep() {
  const fs::path spec = g_dir / "n.spec";
  {
    std::ofstream s(spec);
    s << "# scaling sweep\n"
      << "scheme = cavity\n"
      << "parameter = N\n"
      << "values = 2, 3, 4, 5, 6\n"
      << "kappa = 0.1\n"
      << "tau = 0.1\n";
  }
  const fs::path out = g_dir / "n.csv";
  RunResult r = run("sweep " + spec.string() + " -o " + out.string());
  check(r.exit_code == 0, "sweep exits 0");
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  check(header == "n,kappa,tau,offset_fraction,g2_ratio,fidelity,success_probability",
        "sweep CSV header");
  const double d = std::exp(-M_PI / 20.0);
  const double f1 = (1 + d) * (1 + d) / (2 * (1 + d * d));
  const double p1 = (1 + d * d) / 2;
  std::string line;
  int n = 2;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    check(cells.size() == 7, "sweep row has 7 columns");
    check(std::stoi(cells[0]) == n, "rows keep input order");
    check(std::abs(std::stod(cells[5]) - std::pow(f1, n - 1)) < 1e-6,
          "fidelity column follows the closed form at N = " + std::to_string(n));
    check(std::abs(std::stod(cells[6]) - std::pow(p1, n - 1)) < 1e-6,
          "probability column follows the closed form at N = " + std::to_string(n));
    ++n;
    ++rows;
  }
  check(rows == 5, "one CSV row per sweep point");

  // offset sweep is monotone non-increasing in fidelity
  const fs::path spec2 = g_dir / "offset.spec";
  {
    std::ofstream s(spec2);
    s << "parameter = offset_fraction\nvalues = 0, 0.005, 0.01, 0.02\nn = 2\n";
  }
  const fs::path out2 = g_dir / "offset.csv";
  RunResult r2 = run("sweep " + spec2.string() + " -o " + out2.string());
  check(r2.exit_code == 0, "offset sweep exits 0");
  std::ifstream in2(out2);
  std::getline(in2, header);
  double last = 1.0 + 1e-12;
  while (std::getline(in2, line)) {
    const auto pos = line.rfind(',');
    const auto pos2 = line.rfind(',', pos - 1);
    const double f = std::stod(line.substr(pos2 + 1, pos - pos2 - 1));
    check(f <= last + 1e-12, "offset sweep fidelity is non-increasing");
    last = f;
  }

  // zero-decay sweep gives unit rows
  const fs::path spec3 = g_dir / "zero.spec";
  {
    std::ofstream s(spec3);
    s << "parameter = kappa\nvalues = 0\n";
  }
  RunResult r3 = run("sweep " + spec3.string() + " -o " + (g_dir / "zero.csv").string());
  std::ifstream in3(g_dir / "zero.csv");
  std::getline(in3, header);
  std::getline(in3, line);
  check(r3.exit_code == 0 && line.find(",1,1") != std::string::npos,
        "kappa = 0 sweep reports unit fidelity and probability");
}

void test_sweep_errors() {
  const fs::path bad = g_dir / "bad.spec";
  {
    std::ofstream s(bad);
    s << "parameter = kappa\nvalues = 0.1, oops\n";
  }
  RunResult r = run("sweep " + bad.string() + " -o " + (g_dir / "bad.csv").string());
  check(r.exit_code != 0, "malformed sweep spec exits nonzero");
  check(r.stdout_text.find("line 2") != std::string::npos, "parse error reports the line");
  check(r.stdout_text.find("column") != std::string::npos, "parse error reports the column");

  RunResult r2 = run("sweep " + (g_dir / "missing.spec").string());
  check(r2.exit_code != 0, "missing spec file exits nonzero");

  RunResult r3 = run("cavity --n 99");
  check(r3.exit_code != 0, "out-of-range flag exits nonzero");
}

void test_verify() {
  // ideal two-qubit cluster state, one flipped amplitude -> fidelity 0.25
  const fs::path state = g_dir / "state.json";
  {
    std::ofstream s(state);
    s << R"({"layout": [{"label": "q1", "dim": 2}, {"label": "q2", "dim": 2}],)"
      << R"( "amplitudes": [[0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]]})";
  }
  RunResult r = run("verify " + state.string());
  check(r.exit_code == 0, "verify exits 0 on a valid state file");
  check(r.stdout_text.find("cluster_fidelity    = 0.25") != std::string::npos,
        "verify prints the fidelity of the sign-flipped state");
  check(r.stdout_text.find("K1") != std::string::npos &&
            r.stdout_text.find("K2") != std::string::npos,
        "verify prints stabilizer expectations");

  RunResult r2 = run("verify " + (g_dir / "nonexistent.json").string());
  check(r2.exit_code != 0, "verify exits nonzero for a missing file");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_golden <path-to-cli>\n");
    return 2;
  }
  g_cli = argv[1];
  g_dir = fs::temp_directory_path() / ("clustersim_cli_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);
  test_cavity_report();
  test_cavity_offset_report();
  test_ensemble_report();
  test_sweep();
  test_sweep_errors();
  test_verify();
  std::error_code ec;
  fs::remove_all(g_dir, ec);
  if (g_failures > 0) {
    std::printf("%d check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all CLI checks passed\n");
  return 0;
}
