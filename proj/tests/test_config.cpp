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

#include "catgate/config.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

using namespace catgate;

namespace {

std::string error_key(const std::string& json) {
  try {
    (void)parse_config_string(json);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

std::string error_text(const std::string& json) {
  try {
    (void)parse_config_string(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("defaults reproduce the reference operating point", "[config]") {
  const RunConfig cfg = default_config();
  const SystemParams p = cfg.system_params();
  const SystemParams ref = reference_params();
  CHECK(p.omega_c1 == Catch::Approx(ref.omega_c1).epsilon(1e-14));
  CHECK(p.omega_c2 == Catch::Approx(ref.omega_c2).epsilon(1e-14));
  CHECK(p.g1 == Catch::Approx(ref.g1).epsilon(1e-14));
  CHECK(p.g2 == Catch::Approx(ref.g2).epsilon(1e-12));
  CHECK(p.g1_tilde == p.g1);
  CHECK(p.g2_tilde == p.g2);
  CHECK(cfg.system.k == 6);
  CHECK(cfg.decoherence.T_us == std::vector<double>{5, 10, 15});
  CHECK(cfg.decoherence.kappa_inv_us == std::vector<double>{10, 50, 136, 300});
  CHECK(cfg.simulation.mode == EvolutionMode::open);
}

TEST_CASE("empty document gives the defaults", "[config]") {
  CHECK(config_hash(parse_config_string("{}")) == config_hash(default_config()));
}

TEST_CASE("missing coupling is solved and noted", "[config]") {
  const RunConfig cfg = parse_config_string("{}");
  REQUIRE(cfg.notes.size() == 1);
  CHECK(cfg.notes[0].find("system.g2_ghz not set") != std::string::npos);
  CHECK(cfg.notes[0].find("0.14982983") != std::string::npos);
  const RunConfig given = parse_config_string(R"({"system": {"g2_ghz": 0.2}})");
  CHECK(given.notes.empty());
  CHECK(to_ghz(given.system_params().g2) == Catch::Approx(0.2));
}

TEST_CASE("unknown keys are rejected with their path", "[config]") {
  CHECK(error_key(R"({"sytem": {}})") == "sytem");
  CHECK(error_key(R"({"system": {"omega_c3_ghz": 1.0}})") == "system.omega_c3_ghz");
  CHECK(error_text(R"({"simulation": {"steps": 10}})").find("unknown key") != std::string::npos);
}

TEST_CASE("wrong value types are rejected", "[config]") {
  CHECK(error_key(R"({"system": {"k": "six"}})") == "system.k");
  CHECK(error_text(R"({"decoherence": {"T_us": 5}})").find("wrong value type") !=
        std::string::npos);
}

TEST_CASE("negative detuning is reported against the cavity frequency", "[config]") {
  const std::string msg = error_text(R"({"system": {"omega_c1_ghz": 13.0}})");
  CHECK(msg.find("system.omega_c1_ghz") == 0);
  CHECK(msg.find("detuning must be positive") != std::string::npos);
  CHECK(error_key(R"({"system": {"omega_c2_ghz": 8.0}})") == "system.omega_c2_ghz");
}

TEST_CASE("other invalid values name their keys", "[config]") {
  CHECK(error_key(R"({"system": {"omega_fg_ghz": 12.0}})") == "system.omega_fg_ghz");
  CHECK(error_key(R"({"system": {"k": 0}})") == "system.k");
  CHECK(error_key(R"({"system": {"g1_ghz": -0.1}})") == "system.g1_ghz");
  CHECK(error_key(R"({"system": {"n2_trunc": 4}})") == "system.n2_trunc");
  CHECK(error_key(R"({"decoherence": {"T_us": []}})") == "decoherence.T_us");
  CHECK(error_key(R"({"decoherence": {"kappa_inv_us": [10, -1]}})") ==
        "decoherence.kappa_inv_us");
  CHECK(error_key(R"({"simulation": {"phase_per_step": 0.5}})") == "simulation.phase_per_step");
  CHECK(error_key(R"({"simulation": {"dt_ns": 0.01}})") == "simulation.dt_ns");
  CHECK(error_key(R"({"simulation": {"mode": "fast"}})") == "simulation.mode");
  CHECK(error_key(R"({"simulation": {"quadrature_n": 1}})") == "simulation.quadrature_n");
  CHECK(error_key(R"({"workers": 0})") == "workers");
}

TEST_CASE("malformed json is a file-level error", "[config]") {
  CHECK(error_key("{\"system\": ") == "");
  CHECK(error_text("{\"system\": ").find("malformed JSON") != std::string::npos);
}

TEST_CASE("missing config file", "[config]") {
  try {
    (void)parse_config("/nonexistent/catgate.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cannot open config file") != std::string::npos);
  }
}

TEST_CASE("config file round trip", "[config]") {
  const std::string path = "catgate_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"decoherence": {"T_us": [7.5], "kappa_inv_us": [20, 40]},
               "simulation": {"mode": "closed", "quadrature_n": 4}})";
  }
  const RunConfig cfg = parse_config(path);
  std::remove(path.c_str());
  CHECK(cfg.decoherence.T_us == std::vector<double>{7.5});
  CHECK(cfg.simulation.mode == EvolutionMode::closed);
  const GateScenario sc = cfg.scenario(7.5, 20.0);
  CHECK(sc.decoherence.kappa1 == Catch::Approx(0.05));
  CHECK(sc.decoherence.gamma_fg == Catch::Approx(1.0 / 7.5));
  CHECK(sc.mode == EvolutionMode::closed);
}

TEST_CASE("step length in nanoseconds maps to a phase per step", "[config]") {
  const RunConfig cfg = parse_config_string(R"({"simulation": {"dt_ns": 0.001}})");
  const GateScenario sc = cfg.scenario(5.0, 10.0);
  CHECK(sc.phase_per_step == Catch::Approx(0.001 * ghz(6.65)).epsilon(1e-12));
}

TEST_CASE("fnv hash reference vectors", "[config]") {
  CHECK(detail::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(detail::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(detail::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config hash ignores presentation and output paths", "[config]") {
  const RunConfig a = parse_config_string(R"({"system": {"k": 6, "g1_ghz": 0.15}})");
  const RunConfig b = parse_config_string(
      "{\n  \"output\": {\"csv\": \"other.csv\"},\n  \"workers\": 3,\n"
      "  \"system\": {\"g1_ghz\": 0.150, \"k\": 6}\n}");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  const RunConfig c = parse_config_string(R"({"system": {"cat_amplitude": 0.4}})");
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("config hash is frozen for the defaults", "[config]") {
  // Regression value; changes only when the canonical form changes.
  CHECK(config_hash(default_config()) == "683db6017c164e0f");
}
