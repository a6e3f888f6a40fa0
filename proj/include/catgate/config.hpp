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

#pragma once

// JSON run configuration. Frequencies are linear (f = omega / 2pi) in GHz,
// times in us, and are converted to rad/ns exactly once, here.
//
//   {
//     "system": {
//       "omega_eg_ghz": 5.0, "omega_fe_ghz": 7.5, "omega_fg_ghz": 12.5,
//       "omega_c1_ghz": 11.0, "omega_c2_ghz": 5.85,
//       "g1_ghz": 0.15,            "g2_ghz": <optional, solved from k>,
//       "g1_tilde_ghz": <= g1>,    "g2_tilde_ghz": <= g2>,
//       "k": 6, "cat_amplitude": 0.5, "n1_trunc": 6, "n2_trunc": 12,
//       "include_unwanted_couplings": true
//     },
//     "decoherence": { "T_us": [5, 10, 15], "kappa_inv_us": [10, 50, 136, 300] },
//     "simulation": {
//       "mode": "open", "phase_per_step": 0.05, "dt_ns": <optional>,
//       "t_final_ns": <optional, gate time>, "record_stride": 0,
//       "renormalize": false, "positivity_check_stride": 1000,
//       "quadrature_n": 8, "fidelity": "sqrt_overlap", "averaging": "automatic"
//     },
//     "output": { "csv": "sweep.csv", "manifest": "sweep.json" },
//     "workers": 1
//   }

#include "catgate/analysis.hpp"
#include "catgate/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace catgate {

/// Configuration problem. key() names the offending entry ("" when the file
/// itself is the problem).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SystemSection {
  double omega_eg_ghz = 5.0;
  double omega_fe_ghz = 7.5;
  double omega_fg_ghz = 12.5;
  double omega_c1_ghz = 11.0;
  double omega_c2_ghz = 5.85;
  double g1_ghz = 0.150;
  std::optional<double> g2_ghz;  // filled from k when absent
  std::optional<double> g1_tilde_ghz;
  std::optional<double> g2_tilde_ghz;
  int k = 6;
  double cat_amplitude = 0.5;
  int n1_trunc = 6;
  int n2_trunc = 12;
  bool include_unwanted_couplings = true;
};

struct DecoherenceSection {
  std::vector<double> T_us{5.0, 10.0, 15.0};
  std::vector<double> kappa_inv_us{10.0, 50.0, 136.0, 300.0};
};

struct SimulationSection {
  EvolutionMode mode = EvolutionMode::open;
  double phase_per_step = kDefaultPhasePerStep;
  std::optional<double> dt_ns;
  std::optional<double> t_final_ns;
  int record_stride = 0;
  bool renormalize = false;
  int positivity_check_stride = 1000;
  int quadrature_n = 8;
  FidelityKind fidelity = FidelityKind::sqrt_overlap;
  AveragingStrategy averaging = AveragingStrategy::automatic;
};

struct OutputSection {
  std::string csv = "sweep.csv";
  std::string manifest = "sweep.json";
};

struct RunConfig {
  SystemSection system;
  DecoherenceSection decoherence;
  SimulationSection simulation;
  OutputSection output;
  int workers = 1;
  std::vector<std::string> notes;  // informational messages produced at parse

  [[nodiscard]] SystemParams system_params() const;
  [[nodiscard]] GateScenario scenario(double T_us, double kappa_inv_us) const;
  void validate();
};

namespace detail {

inline std::string averaging_name(AveragingStrategy a) {
  switch (a) {
    case AveragingStrategy::automatic: return "automatic";
    case AveragingStrategy::direct: return "direct";
    case AveragingStrategy::linear: return "linear";
  }
  return "?";
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& prefix,
                           const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(prefix.empty() ? key : prefix + "." + key, "unknown key");
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const std::string& prefix, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(prefix + "." + key, "wrong value type");
  }
}

template <typename T>
void read(const nlohmann::json& obj, const std::string& prefix, const char* key,
          std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T v{};
  read(obj, prefix, key, v);
  out = v;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline SystemParams RunConfig::system_params() const {
  const auto& s = system;
  SystemParams p;
  p.omega_eg = ghz(s.omega_eg_ghz);
  p.omega_fe = ghz(s.omega_fe_ghz);
  p.omega_fg = ghz(s.omega_fg_ghz);
  p.omega_c1 = ghz(s.omega_c1_ghz);
  p.omega_c2 = ghz(s.omega_c2_ghz);
  p.g1 = ghz(s.g1_ghz);
  p.g2 = s.g2_ghz ? ghz(*s.g2_ghz)
                  : solve_g2(p.delta1(), p.delta2(), p.delta2() - p.delta1(), s.k);
  p.g1_tilde = s.g1_tilde_ghz ? ghz(*s.g1_tilde_ghz) : p.g1;
  p.g2_tilde = s.g2_tilde_ghz ? ghz(*s.g2_tilde_ghz) : p.g2;
  p.cat_amplitude = s.cat_amplitude;
  p.space = SpaceSpec{s.n1_trunc, s.n2_trunc};
  return p;
}

inline GateScenario RunConfig::scenario(double T_us, double kappa_inv_us) const {
  GateScenario sc;
  sc.params = system_params();
  sc.k = system.k;
  sc.include_unwanted = system.include_unwanted_couplings;
  sc.mode = simulation.mode;
  sc.decoherence = decoherence_for(T_us, kappa_inv_us);
  sc.phase_per_step = simulation.phase_per_step;
  if (simulation.dt_ns) {
    const double rate = std::max(sc.hamiltonian().max_phase_rate(), 1.0);
    sc.phase_per_step = *simulation.dt_ns * rate;
  }
  sc.duration_ns = simulation.t_final_ns;
  sc.fidelity = simulation.fidelity;
  sc.positivity_check_stride = simulation.positivity_check_stride;
  sc.record_stride = simulation.record_stride;
  sc.renormalize = simulation.renormalize;
  return sc;
}

/// Re-checks every model invariant, attributing failures to config keys.
inline void RunConfig::validate() {
  notes.clear();
  const auto& s = system;
  if (s.k < 1) throw ConfigError("system.k", "k must be a positive integer");
  if (s.n1_trunc < 2) throw ConfigError("system.n1_trunc", "must be >= 2");
  if (s.n2_trunc < 2) throw ConfigError("system.n2_trunc", "must be >= 2");
  if (!(s.cat_amplitude > 0.0)) {
    throw ConfigError("system.cat_amplitude", "must be > 0");
  }
  const double scale = std::max({s.omega_fg_ghz, s.omega_eg_ghz, s.omega_fe_ghz, 1.0});
  if (std::abs(s.omega_fg_ghz - (s.omega_eg_ghz + s.omega_fe_ghz)) > 1e-12 * scale) {
    throw ConfigError("system.omega_fg_ghz",
                      "must equal omega_eg_ghz + omega_fe_ghz (three-level consistency)");
  }
  if (!(s.omega_fg_ghz - s.omega_c1_ghz > 0.0)) {
    throw ConfigError("system.omega_c1_ghz",
                      "detuning must be positive (delta1 = omega_fg - omega_c1)");
  }
  if (!(s.omega_fe_ghz - s.omega_c2_ghz > 0.0)) {
    throw ConfigError("system.omega_c2_ghz",
                      "detuning must be positive (delta2 = omega_fe - omega_c2)");
  }
  const double delta1 = s.omega_fg_ghz - s.omega_c1_ghz;
  const double delta2 = s.omega_fe_ghz - s.omega_c2_ghz;
  if (!(delta2 - delta1 > 0.0)) {
    throw ConfigError("system.omega_c2_ghz",
                      "detuning difference delta2 - delta1 must be positive");
  }
  auto nonneg = [](const char* key, double v) {
    if (!(v >= 0.0)) throw ConfigError(std::string("system.") + key, "must be >= 0");
  };
  nonneg("g1_ghz", s.g1_ghz);
  if (s.g2_ghz) nonneg("g2_ghz", *s.g2_ghz);
  if (s.g1_tilde_ghz) nonneg("g1_tilde_ghz", *s.g1_tilde_ghz);
  if (s.g2_tilde_ghz) nonneg("g2_tilde_ghz", *s.g2_tilde_ghz);

  auto positive_list = [](const char* key, const std::vector<double>& v) {
    if (v.empty()) throw ConfigError(std::string("decoherence.") + key, "range is empty");
    for (double x : v) {
      if (!(x > 0.0)) {
        throw ConfigError(std::string("decoherence.") + key, "values must be > 0");
      }
    }
  };
  positive_list("T_us", decoherence.T_us);
  positive_list("kappa_inv_us", decoherence.kappa_inv_us);

  const auto& sim = simulation;
  if (!(sim.phase_per_step > 0.0) || sim.phase_per_step > kMaxPhasePerStep) {
    throw ConfigError("simulation.phase_per_step", "must lie in (0, 0.3] rad");
  }
  if (sim.dt_ns && !(*sim.dt_ns > 0.0)) {
    throw ConfigError("simulation.dt_ns", "must be > 0");
  }
  if (sim.t_final_ns && !(*sim.t_final_ns >= 0.0)) {
    throw ConfigError("simulation.t_final_ns", "must be >= 0");
  }
  if (sim.record_stride < 0) throw ConfigError("simulation.record_stride", "must be >= 0");
  if (sim.positivity_check_stride < 1) {
    throw ConfigError("simulation.positivity_check_stride", "must be >= 1");
  }
  if (sim.quadrature_n < 2) throw ConfigError("simulation.quadrature_n", "must be >= 2");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");

  if (!s.g2_ghz) {
    const double g2 = solve_g2(delta1, delta2, delta2 - delta1, s.k);
    std::ostringstream note;
    note.precision(10);
    note << "system.g2_ghz not set; solved g2 = " << g2 << " GHz for k = " << s.k;
    notes.push_back(note.str());
  }
  // Full model check, including derived quantities and the cat truncation.
  const SystemParams p = system_params();
  try {
    p.validate();
    (void)derive(p, s.k);
  } catch (const std::exception& e) {
    throw ConfigError("system", e.what());
  }
  const double tail = std::max(cat_tail_mass(s.cat_amplitude, Parity::even, s.n2_trunc),
                               cat_tail_mass(s.cat_amplitude, Parity::odd, s.n2_trunc));
  if (tail > kCatTailTolerance) {
    throw ConfigError("system.n2_trunc", "too small for the cat amplitude (tail mass " +
                                             std::to_string(tail) + ")");
  }
  if (sim.dt_ns) {
    GateScenario sc = scenario(decoherence.T_us.front(), decoherence.kappa_inv_us.front());
    if (sc.phase_per_step > kMaxPhasePerStep * (1.0 + 1e-12)) {
      throw ConfigError("simulation.dt_ns",
                        "step-size invariant violated (fastest phase exceeds 0.3 rad/step)");
    }
  }
}

inline RunConfig config_from_json(const nlohmann::json& root) {
  using detail::read;
  RunConfig cfg;
  detail::reject_unknown(root, "", {"system", "decoherence", "simulation", "output", "workers"});
  if (root.contains("system")) {
    const auto& j = root.at("system");
    detail::reject_unknown(j, "system",
                           {"omega_eg_ghz", "omega_fe_ghz", "omega_fg_ghz", "omega_c1_ghz",
                            "omega_c2_ghz", "g1_ghz", "g2_ghz", "g1_tilde_ghz",
                            "g2_tilde_ghz", "k", "cat_amplitude", "n1_trunc", "n2_trunc",
                            "include_unwanted_couplings"});
    auto& s = cfg.system;
    read(j, "system", "omega_eg_ghz", s.omega_eg_ghz);
    read(j, "system", "omega_fe_ghz", s.omega_fe_ghz);
    read(j, "system", "omega_fg_ghz", s.omega_fg_ghz);
    read(j, "system", "omega_c1_ghz", s.omega_c1_ghz);
    read(j, "system", "omega_c2_ghz", s.omega_c2_ghz);
    read(j, "system", "g1_ghz", s.g1_ghz);
    read(j, "system", "g2_ghz", s.g2_ghz);
    read(j, "system", "g1_tilde_ghz", s.g1_tilde_ghz);
    read(j, "system", "g2_tilde_ghz", s.g2_tilde_ghz);
    read(j, "system", "k", s.k);
    read(j, "system", "cat_amplitude", s.cat_amplitude);
    read(j, "system", "n1_trunc", s.n1_trunc);
    read(j, "system", "n2_trunc", s.n2_trunc);
    read(j, "system", "include_unwanted_couplings", s.include_unwanted_couplings);
  }
  if (root.contains("decoherence")) {
    const auto& j = root.at("decoherence");
    detail::reject_unknown(j, "decoherence", {"T_us", "kappa_inv_us"});
    read(j, "decoherence", "T_us", cfg.decoherence.T_us);
    read(j, "decoherence", "kappa_inv_us", cfg.decoherence.kappa_inv_us);
  }
  if (root.contains("simulation")) {
    const auto& j = root.at("simulation");
    detail::reject_unknown(j, "simulation",
                           {"mode", "phase_per_step", "dt_ns", "t_final_ns", "record_stride",
                            "renormalize", "positivity_check_stride", "quadrature_n",
                            "fidelity", "averaging"});
    auto& s = cfg.simulation;
    if (j.contains("mode")) {
      std::string m;
      read(j, "simulation", "mode", m);
      try {
        s.mode = parse_mode(m);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("simulation.mode", e.what());
      }
    }
    read(j, "simulation", "phase_per_step", s.phase_per_step);
    read(j, "simulation", "dt_ns", s.dt_ns);
    read(j, "simulation", "t_final_ns", s.t_final_ns);
    read(j, "simulation", "record_stride", s.record_stride);
    read(j, "simulation", "renormalize", s.renormalize);
    read(j, "simulation", "positivity_check_stride", s.positivity_check_stride);
    read(j, "simulation", "quadrature_n", s.quadrature_n);
    if (j.contains("fidelity")) {
      std::string f;
      read(j, "simulation", "fidelity", f);
      if (f == "sqrt_overlap") {
        s.fidelity = FidelityKind::sqrt_overlap;
      } else if (f == "overlap") {
        s.fidelity = FidelityKind::overlap;
      } else {
        throw ConfigError("simulation.fidelity", "expected sqrt_overlap or overlap");
      }
    }
    if (j.contains("averaging")) {
      std::string a;
      read(j, "simulation", "averaging", a);
      if (a == "automatic") {
        s.averaging = AveragingStrategy::automatic;
      } else if (a == "direct") {
        s.averaging = AveragingStrategy::direct;
      } else if (a == "linear") {
        s.averaging = AveragingStrategy::linear;
      } else {
        throw ConfigError("simulation.averaging", "expected automatic, direct or linear");
      }
    }
  }
  if (root.contains("output")) {
    const auto& j = root.at("output");
    detail::reject_unknown(j, "output", {"csv", "manifest"});
    read(j, "output", "csv", cfg.output.csv);
    read(j, "output", "manifest", cfg.output.manifest);
  }
  read(root, "", "workers", cfg.workers);
  cfg.validate();
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text,
                                     const std::string& origin = "<string>") {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", "malformed JSON in " + origin + ": " + e.what());
  }
  return config_from_json(root);
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str(), path);
}

/// Built-in defaults (the reference operating point), validated.
inline RunConfig default_config() {
  RunConfig cfg;
  cfg.validate();
  return cfg;
}

/// Canonical form of the resolved configuration: every default and the
/// solved g2 are written out, keys sorted. Notes and worker count are
/// excluded so results do not depend on them.
inline nlohmann::json to_json(const RunConfig& cfg) {
  const auto& s = cfg.system;
  const SystemParams p = cfg.system_params();
  nlohmann::json sim{{"mode", to_string(cfg.simulation.mode)},
                     {"phase_per_step", cfg.simulation.phase_per_step},
                     {"record_stride", cfg.simulation.record_stride},
                     {"renormalize", cfg.simulation.renormalize},
                     {"positivity_check_stride", cfg.simulation.positivity_check_stride},
                     {"quadrature_n", cfg.simulation.quadrature_n},
                     {"fidelity", to_string(cfg.simulation.fidelity)},
                     {"averaging", detail::averaging_name(cfg.simulation.averaging)}};
  sim["dt_ns"] = cfg.simulation.dt_ns ? nlohmann::json(*cfg.simulation.dt_ns) : nullptr;
  sim["t_final_ns"] =
      cfg.simulation.t_final_ns ? nlohmann::json(*cfg.simulation.t_final_ns) : nullptr;
  return {{"system",
           {{"omega_eg_ghz", s.omega_eg_ghz},
            {"omega_fe_ghz", s.omega_fe_ghz},
            {"omega_fg_ghz", s.omega_fg_ghz},
            {"omega_c1_ghz", s.omega_c1_ghz},
            {"omega_c2_ghz", s.omega_c2_ghz},
            {"g1_ghz", s.g1_ghz},
            {"g2_ghz", to_ghz(p.g2)},
            {"g1_tilde_ghz", to_ghz(p.g1_tilde)},
            {"g2_tilde_ghz", to_ghz(p.g2_tilde)},
            {"k", s.k},
            {"cat_amplitude", s.cat_amplitude},
            {"n1_trunc", s.n1_trunc},
            {"n2_trunc", s.n2_trunc},
            {"include_unwanted_couplings", s.include_unwanted_couplings}}},
          {"decoherence",
           {{"T_us", cfg.decoherence.T_us}, {"kappa_inv_us", cfg.decoherence.kappa_inv_us}}},
          {"simulation", sim}};
}

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(to_json(cfg).dump())));
  return buf;
}

}  // namespace catgate
