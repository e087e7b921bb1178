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

#include "clustersim/cavity_qed.hpp"

#include <random>

#include <catch2/catch_amalgamated.hpp>

using namespace clustersim;

namespace {

std::mt19937 rng(424242);

StateVector pair_register() { return tensor({atom_plus_e("a"), atom_plus_i("b")}); }

StateVector stage_basis(const std::string& label, int n_max) {
  SubsystemLayout l({{"atom1", 3}, {"atom2", 3}, {kCavityLabel, n_max + 1}});
  Vector v = Vector::Zero(l.total_dimension());
  v(stage_basis_index(label, n_max)) = 1.0;
  return StateVector(l, v);
}

}  // namespace

TEST_CASE("stage config validation") {
  StageConfig c = StageConfig::canonical();
  REQUIRE(c.is_canonical());
  REQUIRE(c.g2 == Catch::Approx(std::sqrt(3.0)));
  REQUIRE(c.t == Catch::Approx(kPi));
  REQUIRE_THROWS_AS(StageConfig::canonical(-0.1), std::invalid_argument);
  StageConfig bad = c;
  bad.n_max = 0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(stage_hamiltonian(bad, false), std::invalid_argument);
  bad = c;
  bad.g1 = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("stage hamiltonian matrix elements") {
  StageConfig cfg = StageConfig::canonical(0.0, 0.3);
  const Operator h = stage_hamiltonian(cfg, true);
  auto el = [&](const std::string& row, const std::string& col) {
    return h.matrix(stage_basis_index(row, cfg.n_max), stage_basis_index(col, cfg.n_max));
  };
  REQUIRE(std::abs(el("gg1", "eg0") - Complex(cfg.g1)) < 1e-15);
  REQUIRE(std::abs(el("gg1", "ge0") - Complex(cfg.g2)) < 1e-15);
  REQUIRE(std::abs(el("ei0", "ei0") - Complex(0.0, -cfg.tau / 2.0)) < 1e-15);
  // |i> couples to nothing: column of |gi0> vanishes except the decay-free diagonal
  const long gi0 = stage_basis_index("gi0", cfg.n_max);
  REQUIRE(h.matrix.col(gi0).cwiseAbs().maxCoeff() < 1e-15);
  // the spectator level still rides along excitation on the partner atom
  REQUIRE(std::abs(el("gi1", "ei0") - Complex(cfg.g1)) < 1e-15);
}

TEST_CASE("conditional hamiltonian reduces to the resonant one at zero decay") {
  StageConfig cfg = StageConfig::canonical();
  const Operator bare = stage_hamiltonian(cfg, false);
  const Operator cond = stage_hamiltonian(cfg, true);
  REQUIRE((bare.matrix - cond.matrix).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE((bare.matrix - bare.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("excitation number is conserved") {
  StageConfig cfg = StageConfig::canonical();
  const Operator h = stage_hamiltonian(cfg, false);
  const auto& layout = h.layout;
  Matrix pe = Matrix::Zero(3, 3);
  pe(1, 1) = 1.0;
  Matrix num = Matrix::Zero(cfg.n_max + 1, cfg.n_max + 1);
  for (int n = 0; n <= cfg.n_max; ++n) num(n, n) = n;
  SubsystemLayout atom({{"x", 3}});
  SubsystemLayout mode({{"x", cfg.n_max + 1}});
  Matrix nexc = embed(Operator(atom, pe), {"atom1"}, layout).matrix +
                embed(Operator(atom, pe), {"atom2"}, layout).matrix +
                embed(Operator(mode, num), {kCavityLabel}, layout).matrix;
  Matrix comm = h.matrix * nexc - nexc * h.matrix;
  REQUIRE(comm.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed forms at the canonical point reproduce the special-case map") {
  const double g1 = 1.0, g2 = std::sqrt(3.0), t = kPi;
  auto eg = closed_form_branch("eg", t, g1, g2);
  REQUIRE(std::abs(eg[0].amplitude - Complex(1.0)) < 1e-12);
  REQUIRE(std::abs(eg[1].amplitude) < 1e-12);
  REQUIRE(std::abs(eg[2].amplitude) < 1e-12);
  auto ei = closed_form_branch("ei", t, g1, g2);
  REQUIRE(std::abs(ei[0].amplitude - Complex(-1.0)) < 1e-12);
  REQUIRE(std::abs(ei[1].amplitude) < 1e-12);
  auto gg = closed_form_branch("gg", 0.77, g1, g2);
  REQUIRE(gg.size() == 1);
  REQUIRE(gg[0].amplitude == Complex(1.0));
  REQUIRE_THROWS_AS(closed_form_branch("xy", 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("closed forms match matrix-exponential evolution") {
  std::uniform_real_distribution<double> ut(0.0, 10.0), ug(0.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double t = ut(rng), g2 = ug(rng);
    StageConfig cfg;
    cfg.g2 = g2;
    cfg.t = t;
    const Operator h = stage_hamiltonian(cfg, false);
    for (const std::string branch : {"eg", "ei", "gg", "gi"}) {
      StateVector out = evolve(stage_basis(branch.substr(0, 2) + "0", cfg.n_max), h, t, 1e-12);
      Vector expected = Vector::Zero(out.dimension());
      for (const auto& [basis, amp] : closed_form_branch(branch, t, cfg.g1, g2))
        expected(stage_basis_index(basis, cfg.n_max)) = amp;
      REQUIRE((out.amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("classical pulse") {
  StateVector i_state = atom_state("a", 0, 0, 1);
  StateVector once = classical_pulse(i_state, "a");
  REQUIRE(std::abs(once.amplitude(1) - Complex(-1.0)) < 1e-15);
  StateVector twice = classical_pulse(once, "a");
  REQUIRE(std::abs(twice.amplitude(2) - Complex(-1.0)) < 1e-15);
  StateVector g_state = atom_state("a", 1, 0, 0);
  REQUIRE(std::abs(classical_pulse(g_state, "a").amplitude(0) - Complex(1.0)) < 1e-15);
  REQUIRE_THROWS_AS(classical_pulse(g_state, "nope"), std::invalid_argument);
}

TEST_CASE("ideal stage produces the two-atom cluster state") {
  StageResult r = run_stage(pair_register(), {"a", "b"}, StageConfig::canonical());
  REQUIRE(r.survival_probability == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(r.cavity_leakage < 1e-12);
  REQUIRE(cluster_fidelity(r.state, 2) == Catch::Approx(1.0).margin(1e-12));
  auto idx = [](int i1, int i2) { return long(i1) * 3 + i2; };
  REQUIRE(std::abs(r.state.amplitude(idx(0, 0)) - Complex(0.5)) < 1e-12);
  REQUIRE(std::abs(r.state.amplitude(idx(0, 1)) - Complex(-0.5)) < 1e-12);
  REQUIRE(std::abs(r.state.amplitude(idx(1, 0)) - Complex(0.5)) < 1e-12);
  REQUIRE(std::abs(r.state.amplitude(idx(1, 1)) - Complex(0.5)) < 1e-12);
}

TEST_CASE("decaying stage matches the expected branch weights") {
  const double d = std::exp(-kPi / 20.0);
  StageResult r = run_stage(pair_register(), {"a", "b"}, StageConfig::canonical(0.1, 0.1));
  REQUIRE(r.survival_probability == Catch::Approx((1 + d * d) / 2).margin(1e-12));
  REQUIRE(r.cavity_leakage < 1e-12);
  auto idx = [](int i1, int i2) { return long(i1) * 3 + i2; };
  REQUIRE(std::abs(r.state.amplitude(idx(0, 0)) - Complex(0.5)) < 1e-9);
  REQUIRE(std::abs(r.state.amplitude(idx(0, 1)) - Complex(-0.5)) < 1e-9);
  REQUIRE(std::abs(r.state.amplitude(idx(1, 0)) - Complex(0.5 * d)) < 1e-9);
  REQUIRE(std::abs(r.state.amplitude(idx(1, 1)) - Complex(0.5 * d)) < 1e-9);
}

TEST_CASE("zero-excitation input passes through unchanged") {
  StateVector gg = tensor({atom_state("a", 1, 0, 0), atom_state("b", 1, 0, 0)});
  StageResult r = run_stage(gg, {"a", "b"}, StageConfig::canonical(0.2, 0.2));
  REQUIRE(r.survival_probability == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(std::abs(r.state.amplitude(0) - Complex(1.0)) < 1e-12);
}

TEST_CASE("uniform decay factorizes over excitation sectors") {
  // for kappa == tau the conditional evolution equals exp(-kappa t n / 2)
  // times the decay-free evolution on each N_exc = n sector
  const double kappa = 0.13, t = 1.7;
  StageConfig cfg;
  cfg.kappa = kappa;
  cfg.tau = kappa;
  cfg.t = t;
  const Operator h0 = stage_hamiltonian(cfg, false);
  const Operator hc = stage_hamiltonian(cfg, true);
  // basis labels grouped by excitation count
  const std::vector<std::vector<std::string>> sectors = {
      {"gg0", "gi0", "ig0", "ii0"},
      {"eg0", "ge0", "ei0", "ie0", "gg1", "gi1", "ig1", "ii1"}};
  std::normal_distribution<double> nd;
  for (std::size_t n = 0; n < sectors.size(); ++n) {
    Vector v = Vector::Zero(27);
    for (const auto& label : sectors[n])
      v(stage_basis_index(label, cfg.n_max)) = Complex(nd(rng), nd(rng));
    StateVector s(h0.layout, Vector(v / v.norm()));
    StateVector plain = evolve(s, h0, t, 1e-12);
    StateVector damped = evolve(s, hc, t, 1e-12);
    const double factor = std::exp(-0.5 * kappa * t * double(n));
    REQUIRE((damped.amplitudes() - factor * plain.amplitudes()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("chains compose stages and match the closed forms") {
  ChainResult ideal = run_chain(2, StageConfig::canonical());
  REQUIRE(ideal.fidelity == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(ideal.success_probability == Catch::Approx(1.0).margin(1e-12));

  ChainResult three = run_chain(3, StageConfig::canonical());
  REQUIRE(three.fidelity == Catch::Approx(1.0).margin(1e-12));
  // (1/2 sqrt2)(|g> sz + |e>)(|g> sz + |e>)(|g> + |e>) expanded sign pattern
  const double m = 1.0 / (2.0 * std::sqrt(2.0));
  const double want[] = {m, -m, -m, -m, m, -m, m, m};
  const auto& layout = three.state.layout();
  int w = 0;
  for (int b1 : {0, 1})
    for (int b2 : {0, 1})
      for (int b3 : {0, 1}) {
        const long flat = b1 * layout.stride(0) + b2 * layout.stride(1) + b3 * layout.stride(2);
        REQUIRE(std::abs(three.state.amplitude(flat) - Complex(want[w++])) < 1e-9);
      }

  ChainResult decayed = run_chain(3, StageConfig::canonical(0.1, 0.1));
  auto [f3, p3] = expected_chain_metrics(3, 0.1);
  REQUIRE(decayed.fidelity == Catch::Approx(f3).margin(1e-9));
  REQUIRE(decayed.success_probability == Catch::Approx(p3).margin(1e-9));
  // success probability is exactly the product of stage survivals
  double prod = 1.0;
  for (const auto& s : decayed.per_stage) prod *= s.survival_probability;
  REQUIRE(decayed.success_probability == prod);

  REQUIRE_THROWS_AS(run_chain(1, StageConfig::canonical()), std::invalid_argument);
  REQUIRE_THROWS_AS(run_chain(9, StageConfig::canonical()), std::invalid_argument);
}

TEST_CASE("survival probability is non-increasing in the decay rate") {
  for (int n : {2, 3}) {
    double last = 1.1;
    for (double kappa : {0.0, 0.05, 0.1, 0.2}) {
      ChainResult r = run_chain(n, StageConfig::canonical(kappa, kappa));
      REQUIRE(r.success_probability <= last + 1e-12);
      last = r.success_probability;
    }
  }
}

TEST_CASE("closed-form chain metrics") {
  auto [f2, p2] = expected_chain_metrics(2, 0.1);
  const double d = std::exp(-kPi / 20.0);
  REQUIRE(f2 == Catch::Approx((1 + d) * (1 + d) / (2 * (1 + d * d))).margin(1e-15));
  REQUIRE(p2 == Catch::Approx((1 + d * d) / 2).margin(1e-15));
  auto [f0, p0] = expected_chain_metrics(4, 0.0);
  REQUIRE(f0 == 1.0);
  REQUIRE(p0 == 1.0);
  REQUIRE_THROWS_AS(expected_chain_metrics(3, 0.1, 0.2), std::invalid_argument);

  auto [f5, p5] = expected_chain_metrics(5, 0.1);
  ChainResult sim = run_chain(5, StageConfig::canonical(0.1, 0.1));
  REQUIRE(sim.fidelity == Catch::Approx(f5).margin(1e-6));
  REQUIRE(sim.success_probability == Catch::Approx(p5).margin(1e-6));
}

TEST_CASE("timing offset degenerates to the plain stage at zero offset") {
  StateVector reg = pair_register();
  StageConfig cfg = StageConfig::canonical(0.05, 0.05);
  StageResult plain = run_stage(reg, {"a", "b"}, cfg);
  TimingOffsetResult timed = timing_offset_stage(reg, {"a", "b"}, cfg, 0.0, "a");
  REQUIRE((timed.state.amplitudes() - plain.state.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(timed.survival_probability ==
          Catch::Approx(plain.survival_probability).margin(1e-12));
}

TEST_CASE("timing offset at one percent stays near-perfect") {
  StateVector reg = pair_register();
  StageConfig cfg = StageConfig::canonical();
  for (const std::string early : {"a", "b"}) {
    TimingOffsetResult r = timing_offset_stage(reg, {"a", "b"}, cfg, 0.01, early);
    REQUIRE(r.fidelity >= 0.99);
    REQUIRE(r.fidelity <= 1.0 + 1e-12);
  }
  REQUIRE_THROWS_AS(timing_offset_stage(reg, {"a", "b"}, cfg, 1.0, "a"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(timing_offset_stage(reg, {"a", "b"}, cfg, 0.01, "c"),
                    std::invalid_argument);
}

TEST_CASE("fidelity declines monotonically with growing offset") {
  StateVector reg = pair_register();
  StageConfig cfg = StageConfig::canonical();
  double last = 1.0 + 1e-12;
  for (double f : {0.0, 0.005, 0.01, 0.02, 0.05}) {
    TimingOffsetResult r = timing_offset_stage(reg, {"a", "b"}, cfg, f, "a");
    REQUIRE(r.fidelity <= last + 1e-12);
    last = r.fidelity;
  }
}

TEST_CASE("non-canonical timing leaves recorded cavity leakage") {
  StageConfig cfg;
  cfg.t = 0.3 * kPi;  // cavity not yet disentangled
  StageResult r = run_stage(pair_register(), {"a", "b"}, cfg);
  REQUIRE(r.survival_probability == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(r.cavity_leakage > 1e-3);
}

TEST_CASE("double excitation trips the truncation sentinel") {
  StateVector ee = tensor({atom_state("a", 0, 1, 0), atom_state("b", 0, 1, 0)});
  REQUIRE_THROWS_AS(run_stage(ee, {"a", "b"}, StageConfig::canonical()), std::runtime_error);
}

TEST_CASE("coupling geometry") {
  GeometryConfig geom(2.0, 30.0, 0.85, 0.0085, 100.0);
  REQUIRE(coupling_at_position(geom, 0.0) == Catch::Approx(2.0));
  REQUIRE(coupling_at_position(geom, geom.waist) == Catch::Approx(2.0 / std::exp(1.0)));
  const double r_third = position_for_coupling_ratio(geom, 1.0 / std::sqrt(3.0));
  REQUIRE(r_third == Catch::Approx(geom.waist * std::sqrt(std::log(std::sqrt(3.0))))
                         .margin(1e-12));
  REQUIRE(r_third / geom.waist == Catch::Approx(0.7411).margin(5e-4));
  // round trip to 1e-12
  for (double ratio : {1.0, 1.0 / std::sqrt(3.0), 1.0 / std::exp(1.0), 0.37}) {
    const double r = position_for_coupling_ratio(geom, ratio);
    REQUIRE(coupling_at_position(geom, r) / geom.peak_coupling ==
            Catch::Approx(ratio).margin(1e-12));
  }
  REQUIRE(position_for_coupling_ratio(geom, 1.0) == 0.0);
  REQUIRE_THROWS_AS(position_for_coupling_ratio(geom, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(position_for_coupling_ratio(geom, 1.2), std::domain_error);
  REQUIRE(geom.wavevector() * geom.wavelength == Catch::Approx(2 * kPi).margin(1e-12));
  REQUIRE(geom.rayleigh_parameter() ==
          Catch::Approx(kPi * geom.waist * geom.waist / geom.wavelength));
  REQUIRE_THROWS_AS(GeometryConfig(1.0, -1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("lamb-dicke infidelity") {
  const double lambda = 0.852;
  const double k = 2 * kPi / lambda;
  const double a_star = lambda * std::sqrt(0.01 / kPi) / (2 * kPi);
  REQUIRE(lamb_dicke_infidelity(k, a_star) == Catch::Approx(0.01).margin(1e-12));
  // the common 0.01 lambda rounding gives a slightly larger value
  REQUIRE(lamb_dicke_infidelity(k, 0.01 * lambda) ==
          Catch::Approx(std::pow(0.02 * kPi, 2) * kPi).margin(1e-12));
  REQUIRE(lamb_dicke_infidelity(k, 1e-9) < 1e-12);
  REQUIRE_THROWS_AS(lamb_dicke_infidelity(0.0, 1.0), std::invalid_argument);
}
