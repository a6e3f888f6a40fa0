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

// catgate: design, simulate and sweep the hybrid photon/cat controlled-phase
// gate.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical
// failure (positivity breach, step-size violation, failed sweep cell).

#include "catgate/analysis.hpp"
#include "catgate/config.hpp"
#include "catgate/convergence.hpp"
#include "catgate/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

using namespace catgate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  int workers = 1;
  std::string out;
  std::string manifest;
  std::string mode;
  std::string grid;
  std::vector<double> T;
  std::vector<double> kappa_inv;
  int quadrature = 0;
  double theta = kPi / 4.0;
  double phi = kPi / 4.0;
  std::string dump_trajectory;
  std::optional<double> phase_step;
  bool no_wall_time = false;
};

int resolve_workers(int cli_workers) {
  if (const char* env = std::getenv("CATGATE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("CATGATE_THREADS must be a positive integer, got '") + env + "'");
  }
  if (cli_workers < 1) throw UsageError("--workers must be >= 1");
  return cli_workers;
}

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? default_config() : parse_config(o.config_path);
  if (o.phase_step) cfg.simulation.phase_per_step = *o.phase_step;
  if (!o.mode.empty()) cfg.simulation.mode = parse_mode(o.mode);
  if (o.quadrature != 0) cfg.simulation.quadrature_n = o.quadrature;
  cfg.validate();
  for (const auto& note : cfg.notes) std::cerr << "note: " << note << '\n';
  return cfg;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

double first_or(const std::vector<double>& v, double fallback) {
  return v.empty() ? fallback : v.front();
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

void print_table(const TruthTable& t) {
  static const char* labels[] = {"|0,cat>    ", "|0,cat_bar>", "|1,cat>    ", "|1,cat_bar>"};
  std::cout << "truth table <logical_i|U|logical_j> (re, im):\n";
  for (int i = 0; i < 4; ++i) {
    std::cout << "  " << labels[i];
    for (int j = 0; j < 4; ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  (%+.6f, %+.6f)", t.entries(i, j).real(),
                    t.entries(i, j).imag());
      std::cout << buf;
    }
    std::cout << '\n';
  }
  std::cout << "leakage: " << fmt(t.leakage) << (t.valid ? "" : "  (INVALID: above 0.05)")
            << '\n';
}

// --- subcommands -----------------------------------------------------------

int cmd_design(const Options& o) {
  const RunConfig cfg = load_config(o);
  const SystemParams p = cfg.system_params();
  const DerivedQuantities d = derive(p, cfg.system.k);
  std::cout << std::setprecision(6);
  std::cout << "k                 " << d.k << '\n'
            << "g1/2pi            " << to_mhz(p.g1) << " MHz\n"
            << "g2/2pi            " << to_mhz(p.g2) << " MHz\n"
            << "delta1/2pi        " << to_mhz(d.delta1) << " MHz\n"
            << "delta2/2pi        " << to_mhz(d.delta2) << " MHz\n"
            << "Delta/2pi         " << to_mhz(d.Delta) << " MHz\n"
            << "delta1~/2pi       " << to_mhz(d.delta1_tilde) << " MHz\n"
            << "delta2~/2pi       " << to_mhz(d.delta2_tilde) << " MHz\n"
            << "omega_c1/2pi      " << to_ghz(p.omega_c1) << " GHz\n"
            << "omega_c2/2pi      " << to_ghz(p.omega_c2) << " GHz\n"
            << "lambda1/2pi       " << to_mhz(d.lambda1) << " MHz\n"
            << "lambda2/2pi       " << to_mhz(d.lambda2) << " MHz\n"
            << "lambda/2pi        " << to_mhz(d.lambda) << " MHz\n"
            << "chi/2pi           " << to_mhz(d.chi) << " MHz\n"
            << "eta/2pi           " << to_mhz(d.eta) << " MHz\n"
            << "t_gate            " << d.t_gate << " ns (" << d.t_gate * 1e-3 << " us)\n";
  const ValidityReport v = validity_report(p, d);
  std::cout << "validity ratios (warn below " << kValidityWarnRatio << "):\n";
  for (const auto& r : v.ratios) {
    std::cout << "  " << std::left << std::setw(26) << r.name << std::right << r.value
              << (r.warning ? "  WARNING" : "") << '\n';
  }
  const std::vector<double> kinv = o.kappa_inv.empty() ? std::vector<double>{136.0} : o.kappa_inv;
  nlohmann::json qj = nlohmann::json::array();
  for (double k : kinv) {
    const auto [q1, q2] = quality_factors(p, k);
    std::cout << "Q at kappa_inv = " << k << " us:  Q1 = " << std::scientific << q1
              << ", Q2 = " << q2 << std::defaultfloat << '\n';
    qj.push_back({{"kappa_inv_us", k}, {"Q1", q1}, {"Q2", q2}});
  }
  if (!o.out.empty()) {
    nlohmann::json ratios = nlohmann::json::array();
    for (const auto& r : v.ratios) {
      ratios.push_back({{"name", r.name}, {"value", r.value}, {"warning", r.warning}});
    }
    write_json(o.out, {{"k", d.k},
                       {"g2_mhz", to_mhz(p.g2)},
                       {"delta_mhz", to_mhz(d.Delta)},
                       {"lambda1_mhz", to_mhz(d.lambda1)},
                       {"lambda2_mhz", to_mhz(d.lambda2)},
                       {"lambda_mhz", to_mhz(d.lambda)},
                       {"chi_mhz", to_mhz(d.chi)},
                       {"eta_mhz", to_mhz(d.eta)},
                       {"t_gate_ns", d.t_gate},
                       {"validity", ratios},
                       {"quality_factors", qj},
                       {"config_hash", config_hash(cfg)}});
  }
  return kExitOk;
}

int cmd_truth_table(const Options& o, int workers) {
  Options local = o;
  if (local.mode.empty()) local.mode = "closed-form";
  const RunConfig cfg = load_config(local);
  const GateScenario sc = cfg.scenario(first_or(o.T, 5.0), first_or(o.kappa_inv, 136.0));
  std::cout << "mode: " << to_string(sc.mode) << '\n';
  RunDiagnostics diag;
  const TruthTable t = truth_table(sc, workers, &diag);
  print_table(t);
  if (sc.mode != EvolutionMode::closed_form) {
    std::cout << "runs: " << diag.runs << ", max trace/norm drift: " << diag.max_trace_drift
              << '\n';
  }
  if (!o.out.empty()) {
    nlohmann::json j = to_json(t);
    j["mode"] = to_string(sc.mode);
    j["config_hash"] = config_hash(cfg);
    write_json(o.out, j);
  }
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  const RunConfig cfg = load_config(o);
  const GateScenario sc = cfg.scenario(first_or(o.T, 5.0), first_or(o.kappa_inv, 136.0));
  const LogicalAngles angles{o.theta, o.phi};
  angles.validate();
  const PointSimulation r = simulate_point(sc, angles);
  std::cout << "mode: " << to_string(sc.mode) << ", theta = " << o.theta
            << ", phi = " << o.phi << '\n'
            << "fidelity: " << fmt(r.fidelity, 10) << '\n'
            << "leakage: " << fmt(r.leakage) << '\n'
            << "trace drift: " << r.diagnostics.max_trace_drift << '\n'
            << "max top-Fock population: " << r.diagnostics.max_top_fock << '\n';
  if (!o.dump_trajectory.empty()) {
    std::ofstream f(o.dump_trajectory);
    if (!f) throw std::runtime_error("cannot write '" + o.dump_trajectory + "'");
    write_trajectory_csv(f, r.trajectory);
  }
  if (!o.out.empty()) {
    write_json(o.out, {{"mode", to_string(sc.mode)},
                       {"theta", o.theta},
                       {"phi", o.phi},
                       {"fidelity", r.fidelity},
                       {"leakage", r.leakage},
                       {"diagnostics", to_json(r.diagnostics)},
                       {"config_hash", config_hash(cfg)}});
  }
  return kExitOk;
}

std::vector<double> grid_axis(const std::vector<double>& values, int n, const char* name) {
  if (int(values.size()) == n) return values;
  if (values.empty()) throw UsageError(std::string("empty ") + name + " range");
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return out;
}

int cmd_sweep(const Options& o, int workers) {
  RunConfig cfg = load_config(o);
  if (!o.T.empty()) cfg.decoherence.T_us = o.T;
  if (!o.kappa_inv.empty()) cfg.decoherence.kappa_inv_us = o.kappa_inv;
  if (!o.grid.empty()) {
    std::smatch m;
    if (!std::regex_match(o.grid, m, std::regex(R"((\d+)[xX](\d+))"))) {
      throw UsageError("--grid expects AxB, got '" + o.grid + "'");
    }
    const int a = std::stoi(m[1]), b = std::stoi(m[2]);
    if (a < 1 || b < 1) throw UsageError("--grid dimensions must be >= 1");
    cfg.decoherence.T_us = grid_axis(cfg.decoherence.T_us, a, "T");
    cfg.decoherence.kappa_inv_us = grid_axis(cfg.decoherence.kappa_inv_us, b, "kappa_inv");
  }
  cfg.validate();
  const std::string csv_path = o.out.empty() ? cfg.output.csv : o.out;
  const std::string manifest_path = o.manifest.empty() ? cfg.output.manifest : o.manifest;

  SweepOptions opt;
  opt.workers = workers;
  opt.record_wall_time = !o.no_wall_time;
  opt.on_cell = [](const SweepResult& r) {
    std::cerr << "cell T = " << r.T_us << " us, kappa_inv = " << r.kappa_inv_us << " us: "
              << (r.ok() ? "F = " + fmt(r.mean_fidelity, 8) : "FAILED: " + r.error) << '\n';
  };
  const auto rows = run_sweep(cfg, opt);
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + csv_path + "'");
    write_sweep_csv(f, rows);
  }
  write_json(manifest_path, sweep_manifest(cfg, rows));
  write_sweep_csv(std::cout, rows);
  for (const auto& r : rows) {
    if (!r.ok()) return kExitNumerical;
  }
  return kExitOk;
}

int cmd_converge(const Options& o, int workers) {
  Options local = o;
  if (local.mode.empty()) local.mode = "closed";
  const RunConfig cfg = load_config(local);
  const GateScenario sc = cfg.scenario(first_or(o.T, 5.0), first_or(o.kappa_inv, 136.0));
  const int n = o.quadrature != 0 ? o.quadrature : 4;
  const ConvergenceReport r = convergence_probe(sc, n, workers);
  std::cout << "mode: " << to_string(sc.mode) << ", quadrature " << n << ", phase step "
            << sc.phase_per_step << " rad\n"
            << "baseline F      " << fmt(r.baseline, 10) << '\n'
            << "half step F     " << fmt(r.half_step, 10) << '\n'
            << "larger space F  " << fmt(r.larger_space, 10) << '\n'
            << r.message << '\n';
  if (!o.out.empty()) {
    nlohmann::json j = to_json(r);
    j["config_hash"] = config_hash(cfg);
    write_json(o.out, j);
  }
  return r.passed ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid photon/cat controlled-phase gate simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON run configuration (defaults built in)");
  app.add_option("--workers", o.workers, "Worker threads (CATGATE_THREADS overrides)");

  auto* design = app.add_subcommand("design", "Derived couplings, validity ratios, Q factors");
  design->add_option("--kappa-inv", o.kappa_inv, "Cavity decay times for Q (us)")->delimiter(',');
  design->add_option("--out", o.out, "Write a JSON report");

  auto* tt = app.add_subcommand("truth-table", "Logical 4x4 truth table");
  tt->add_option("--mode", o.mode, "closed-form | closed | open (default closed-form)");
  tt->add_option("--T", o.T, "Qutrit decoherence scale T (us), open mode")->delimiter(',');
  tt->add_option("--kappa-inv", o.kappa_inv, "Cavity decay time (us), open mode")->delimiter(',');
  tt->add_option("--phase-step", o.phase_step, "Largest phase per RK4 step (rad)");
  tt->add_option("--out", o.out, "Write the table as JSON");

  auto* sim = app.add_subcommand("simulate", "Single input state through the gate");
  sim->add_option("--mode", o.mode, "closed-form | closed | open");
  sim->add_option("--T", o.T, "Qutrit decoherence scale T (us)")->delimiter(',');
  sim->add_option("--kappa-inv", o.kappa_inv, "Cavity decay time (us)")->delimiter(',');
  sim->add_option("--theta", o.theta, "Control superposition angle (rad)");
  sim->add_option("--phi", o.phi, "Target superposition angle (rad)");
  sim->add_option("--phase-step", o.phase_step, "Largest phase per RK4 step (rad)");
  sim->add_option("--dump-trajectory", o.dump_trajectory, "Trajectory CSV path");
  sim->add_option("--out", o.out, "Write a JSON summary");

  auto* sweep = app.add_subcommand("sweep", "Average fidelity over a (T, kappa_inv) grid");
  sweep->add_option("--grid", o.grid, "Grid shape AxB (A values of T, B of kappa_inv)");
  sweep->add_option("--T", o.T, "T values (us)")->delimiter(',');
  sweep->add_option("--kappa-inv", o.kappa_inv, "kappa_inv values (us)")->delimiter(',');
  sweep->add_option("--quadrature", o.quadrature, "Quadrature points per angle");
  sweep->add_option("--mode", o.mode, "closed-form | closed | open");
  sweep->add_option("--phase-step", o.phase_step, "Largest phase per RK4 step (rad)");
  sweep->add_option("--out", o.out, "CSV output path");
  sweep->add_option("--manifest", o.manifest, "JSON manifest path");
  sweep->add_flag("--no-wall-time", o.no_wall_time, "Write wall_time_s = 0 (byte-stable output)");

  auto* conv = app.add_subcommand("converge", "Step-size and truncation convergence probe");
  conv->add_option("--mode", o.mode, "closed-form | closed | open (default closed)");
  conv->add_option("--T", o.T, "T (us), open mode")->delimiter(',');
  conv->add_option("--kappa-inv", o.kappa_inv, "kappa_inv (us), open mode")->delimiter(',');
  conv->add_option("--quadrature", o.quadrature, "Quadrature points per angle (default 4)");
  conv->add_option("--phase-step", o.phase_step, "Largest phase per RK4 step (rad)");
  conv->add_option("--out", o.out, "Write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const int workers = resolve_workers(o.workers);
    if (*design) return cmd_design(o);
    if (*tt) return cmd_truth_table(o, workers);
    if (*sim) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o, workers);
    if (*conv) return cmd_converge(o, workers);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
