// Copyright 2026 The catgate Authors
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

#include "catgate/analysis.hpp"
#include "catgate/convergence.hpp"

#include <catch_amalgamated.hpp>

using namespace catgate;

namespace {

// Reference couplings on a reduced space with a short run, cheap enough to
// evolve density matrices in a unit test.
GateScenario small_scenario(EvolutionMode mode, double duration_ns = 5.0) {
  GateScenario sc;
  sc.params.space = SpaceSpec{3, 8};
  sc.params.cat_amplitude = 0.3;
  sc.mode = mode;
  sc.duration_ns = duration_ns;
  return sc;
}

LogicalMatrix phase_normalized(const LogicalMatrix& t) {
  return t * (std::conj(t(0, 0)) / std::abs(t(0, 0)));
}

}  // namespace

TEST_CASE("quadrature nodes are midpoints", "[analysis]") {
  const auto x = quadrature_nodes(4);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == Catch::Approx(kPi / 4));
  CHECK(x[3] == Catch::Approx(7 * kPi / 4));
  CHECK_THROWS_AS(quadrature_nodes(1), std::invalid_argument);
}

TEST_CASE("distinct inputs up to sign", "[analysis]") {
  CHECK(distinct_inputs(4) == 4);
  CHECK(distinct_inputs(8) > 10);
}

TEST_CASE("mode names round trip", "[analysis]") {
  for (auto m : {EvolutionMode::closed_form, EvolutionMode::closed, EvolutionMode::open}) {
    CHECK(parse_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("quantum"), std::invalid_argument);
}

TEST_CASE("closed-form truth table is controlled phase", "[analysis]") {
  GateScenario sc;
  sc.mode = EvolutionMode::closed_form;
  const TruthTable t = truth_table(sc);
  LogicalMatrix expected = LogicalMatrix::Identity();
  expected(3, 3) = -1.0;
  CHECK((t.entries - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(t.leakage < 1e-12);
  CHECK(t.valid);
}

TEST_CASE("zero-duration evolution gives the identity table", "[analysis]") {
  for (auto mode : {EvolutionMode::closed_form, EvolutionMode::closed, EvolutionMode::open}) {
    GateScenario sc = small_scenario(mode, 0.0);
    const TruthTable t = truth_table(sc);
    CHECK((t.entries - LogicalMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("truth table leakage from a lossy map", "[analysis]") {
  const SpaceSpec s;
  auto basis = logical_basis(0.5, s);
  basis[3] *= std::sqrt(0.6);
  const TruthTable t = truth_table(basis, 0.5, s);
  CHECK(t.leakage == Catch::Approx(0.1).margin(1e-12));
  CHECK_FALSE(t.valid);
}

TEST_CASE("fidelity of the maximally mixed state", "[analysis]") {
  const SpaceSpec s{2, 7};
  const double amp = 0.2;
  const DensityMatrix rho = identity(s.dim()) / double(s.dim());
  const LogicalAngles a{0.3, 2.0};
  CHECK(fidelity_pointwise(rho, a, amp, s) == Catch::Approx(std::sqrt(1.0 / s.dim())));
  CHECK(fidelity_pointwise(rho, a, amp, s, FidelityKind::overlap) ==
        Catch::Approx(1.0 / s.dim()));
}

TEST_CASE("pure-state fidelity of the ideal output is one", "[analysis]") {
  const SpaceSpec s;
  const LogicalAngles a{1.0, 4.0};
  CHECK(fidelity_pointwise(ideal_output(a, 0.5, s), a, 0.5, s) == Catch::Approx(1.0));
  const double st = std::sin(a.theta), sp = std::sin(a.phi);
  CHECK(fidelity_pointwise(logical_input(a, 0.5, s), a, 0.5, s) ==
        Catch::Approx(std::abs(1.0 - 2.0 * st * st * sp * sp)).epsilon(1e-12));
}

TEST_CASE("negative overlap is a numerical error", "[analysis]") {
  CHECK_THROWS_AS(detail::fidelity_from_overlap(-1e-6, FidelityKind::overlap), NumericalError);
  CHECK(detail::fidelity_from_overlap(-1e-12, FidelityKind::sqrt_overlap) == 0.0);
}

TEST_CASE("ideal gate averages to unit fidelity", "[analysis]") {
  GateScenario sc;
  sc.mode = EvolutionMode::closed_form;
  const FidelityResult f = fidelity_average(sc, 8);
  CHECK(f.mean_fidelity == Catch::Approx(1.0).margin(1e-10));
  CHECK(f.min_fidelity == Catch::Approx(1.0).margin(1e-10));
  CHECK(f.samples.size() == 64);
  CHECK(f.mean_leakage < 1e-12);
}

TEST_CASE("logical gate algebra", "[analysis]") {
  const LogicalGates g = logical_gates();
  const LogicalMatrix id = LogicalMatrix::Identity();
  CHECK((g.cp * g.cp - id).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((g.cnot * g.cnot - id).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((g.target_hadamard * g.target_hadamard - id).cwiseAbs().maxCoeff() < 1e-15);
  LogicalVector one_cat = LogicalVector::Zero();
  one_cat(2) = 1.0;
  LogicalVector one_cat_bar = LogicalVector::Zero();
  one_cat_bar(3) = 1.0;
  CHECK((g.cnot * one_cat - one_cat_bar).norm() < 1e-15);
  LogicalVector zero_cat = LogicalVector::Zero();
  zero_cat(0) = 1.0;
  CHECK((g.cnot * zero_cat - zero_cat).norm() < 1e-15);
}

TEST_CASE("entangler overlap for ideal and idle gates", "[analysis]") {
  CHECK(entangled_overlap(logical_gates().cp) == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(entangled_overlap(LogicalMatrix::Identity()) == Catch::Approx(0.5).epsilon(1e-14));
  GateScenario sc;
  sc.mode = EvolutionMode::closed_form;
  CHECK(entangled_state_check(sc) == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("entangled check equals fidelity at the diagonal quarter angles", "[analysis]") {
  const GateScenario sc = small_scenario(EvolutionMode::closed, 40.0);
  const FidelityResult f = fidelity_average(sc, 4);
  CHECK(entangled_state_check(sc) == Catch::Approx(f.at(0, 0)).epsilon(1e-10));
  const GateScenario open = small_scenario(EvolutionMode::open, 5.0);
  const FidelityResult fo = fidelity_average(open, 4);
  CHECK(entangled_state_check(open) == Catch::Approx(fo.at(0, 0)).epsilon(1e-10));
}

TEST_CASE("direct and linear averaging agree", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::open);
  sc.decoherence = decoherence_for(5.0, 10.0);
  const FidelityResult d = fidelity_average(sc, 4, 1, AveragingStrategy::direct);
  const FidelityResult l = fidelity_average(sc, 4, 1, AveragingStrategy::linear);
  CHECK(d.diagnostics.runs == 4);
  CHECK(l.diagnostics.runs == 10);
  CHECK(d.mean_fidelity == Catch::Approx(l.mean_fidelity).margin(1e-10));
  CHECK(d.mean_leakage == Catch::Approx(l.mean_leakage).margin(1e-10));
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    REQUIRE(d.samples[i] == Catch::Approx(l.samples[i]).margin(1e-10));
  }
}

TEST_CASE("results do not depend on the worker count", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::open);
  sc.decoherence = decoherence_for(10.0, 50.0);
  const FidelityResult a = fidelity_average(sc, 4, 1);
  const FidelityResult b = fidelity_average(sc, 4, 3);
  CHECK(a.samples == b.samples);
  const TruthTable ta = truth_table(sc, 1), tb = truth_table(sc, 4);
  CHECK(ta.entries == tb.entries);
}

TEST_CASE("open evolution without decay matches closed evolution", "[analysis]") {
  const GateScenario open = small_scenario(EvolutionMode::open);
  const GateScenario closed = small_scenario(EvolutionMode::closed);
  const FidelityResult fo = fidelity_average(open, 4);
  const FidelityResult fc = fidelity_average(closed, 4);
  CHECK(fo.mean_fidelity == Catch::Approx(fc.mean_fidelity).margin(1e-8));
  const TruthTable to = truth_table(open), tc = truth_table(closed);
  CHECK((to.entries - phase_normalized(tc.entries)).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(to.leakage == Catch::Approx(tc.leakage).margin(1e-8));
}

TEST_CASE("decay lowers the average fidelity of a full gate", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::open);
  sc.duration_ns.reset();
  sc.include_unwanted = false;
  sc.phase_per_step = 0.1;
  const double clean = fidelity_average(sc, 4).mean_fidelity;
  CHECK(clean > 0.9);
  sc.decoherence = decoherence_for(1.0, 1.0);
  const FidelityResult noisy = fidelity_average(sc, 4);
  CHECK(noisy.mean_fidelity < clean);
  CHECK(noisy.diagnostics.max_trace_drift < 1e-10);
  CHECK(noisy.diagnostics.min_eigenvalue > kPositivityTolerance);
}

TEST_CASE("point simulation agrees with the averaged grid", "[analysis]") {
  for (auto mode : {EvolutionMode::closed_form, EvolutionMode::closed, EvolutionMode::open}) {
    const GateScenario sc = small_scenario(mode);
    const FidelityResult f = fidelity_average(sc, 4);
    const PointSimulation p = simulate_point(sc, {kPi / 4, 3 * kPi / 4});
    CHECK(p.fidelity == Catch::Approx(f.at(0, 1)).margin(1e-9));
    CHECK(p.trajectory.size() >= 2);
  }
}

TEST_CASE("json export shape", "[analysis]") {
  GateScenario sc;
  sc.mode = EvolutionMode::closed_form;
  const auto jt = to_json(truth_table(sc));
  CHECK(jt["entries"].size() == 4);
  CHECK(jt["entries"][3][3][0].get<double>() == Catch::Approx(-1.0));
  CHECK(jt["basis"][3] == "|1,cat_bar>");
  const auto jf = to_json(fidelity_average(sc, 4));
  CHECK(jf["grid"].size() == 4);
  CHECK(jf["grid"][0].size() == 4);
  CHECK(jf["mode"] == "closed-form");
  CHECK(jf["fidelity_kind"] == "sqrt_overlap");
}

TEST_CASE("convergence probe passes on a resolved run", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::closed, 30.0);
  sc.params.space = SpaceSpec{4, 10};
  const ConvergenceReport r = convergence_probe(sc, 4);
  CHECK(r.truncation_ok);
  CHECK(r.passed);
  CHECK(r.step_delta < kConvergenceTolerance);
  CHECK(r.truncation_delta < kConvergenceTolerance);
}

TEST_CASE("convergence probe flags a cat that overflows the cutoff", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::closed);
  sc.params.space = SpaceSpec{3, 4};
  sc.params.cat_amplitude = 2.0;
  const ConvergenceReport r = convergence_probe(sc, 4);
  CHECK_FALSE(r.truncation_ok);
  CHECK_FALSE(r.passed);
  CHECK(r.message.find("truncation failure") != std::string::npos);
}

TEST_CASE("convergence probe reports a larger step error for coarse steps", "[analysis]") {
  GateScenario sc = small_scenario(EvolutionMode::closed, 30.0);
  const ConvergenceReport fine = convergence_probe(sc, 4);
  sc.phase_per_step = 0.3;
  const ConvergenceReport coarse = convergence_probe(sc, 4);
  CHECK(coarse.step_delta > 10.0 * fine.step_delta);
  CHECK(coarse.message.find("step delta") != std::string::npos);
}
