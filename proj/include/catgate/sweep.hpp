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

// Fidelity over a (T, kappa_inv) grid, one cell per decoherence setting.

#include "catgate/analysis.hpp"
#include "catgate/config.hpp"
#include "catgate/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace catgate {

struct SweepResult {
  double T_us = 0.0;
  double kappa_inv_us = 0.0;
  double mean_fidelity = std::numeric_limits<double>::quiet_NaN();
  double leakage = std::numeric_limits<double>::quiet_NaN();
  double trace_drift = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
  std::string config_hash;
  std::string error;  // empty when the cell succeeded
  FidelityResult fidelity;

  [[nodiscard]] bool ok() const { return error.empty(); }
};

struct SweepOptions {
  int workers = 1;
  bool record_wall_time = true;  // false writes 0 so outputs are byte-stable
  std::function<void(const SweepResult&)> on_cell;  // called as cells finish
};

/// Runs every cell of the configured grid, T-major. A cell that throws is
/// recorded with its error and the sweep continues.
inline std::vector<SweepResult> run_sweep(const RunConfig& cfg, const SweepOptions& opt = {}) {
  const std::string hash = config_hash(cfg);
  std::vector<SweepResult> rows;
  for (double T : cfg.decoherence.T_us) {
    for (double kinv : cfg.decoherence.kappa_inv_us) {
      SweepResult r;
      r.T_us = T;
      r.kappa_inv_us = kinv;
      r.config_hash = hash;
      rows.push_back(r);
    }
  }
  // Either cells or the runs inside a cell are spread over the workers.
  // Each run is deterministic, so the split does not change any number.
  const int workers = std::max(1, opt.workers);
  const bool across_cells = int(rows.size()) >= workers;
  auto run_cell = [&](std::size_t i) {
    SweepResult& r = rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const GateScenario sc = cfg.scenario(r.T_us, r.kappa_inv_us);
      r.fidelity = fidelity_average(sc, cfg.simulation.quadrature_n,
                                    across_cells ? 1 : workers, cfg.simulation.averaging);
      r.mean_fidelity = r.fidelity.mean_fidelity;
      r.leakage = r.fidelity.mean_leakage;
      r.trace_drift = r.fidelity.diagnostics.max_trace_drift;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (opt.record_wall_time) {
      r.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    if (opt.on_cell) opt.on_cell(r);
  };
  parallel_for(rows.size(), across_cells ? workers : 1, run_cell);
  return rows;
}

inline const char* kSweepCsvHeader =
    "T_us,kappa_inv_us,mean_fidelity,leakage,trace_drift,wall_time_s,config_hash";

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

/// Header plus one row per cell, LF line endings.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    os << csv_number(r.T_us) << ',' << csv_number(r.kappa_inv_us) << ','
       << csv_number(r.mean_fidelity) << ',' << csv_number(r.leakage) << ','
       << csv_number(r.trace_drift) << ',' << csv_number(r.wall_time_s) << ','
       << r.config_hash << '\n';
  }
}

inline nlohmann::json sweep_manifest(const RunConfig& cfg, const std::vector<SweepResult>& rows) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json c{{"T_us", r.T_us},
                     {"kappa_inv_us", r.kappa_inv_us},
                     {"wall_time_s", r.wall_time_s},
                     {"status", r.ok() ? "ok" : "failed"}};
    if (r.ok()) {
      c["mean_fidelity"] = r.mean_fidelity;
      c["leakage"] = r.leakage;
      c["trace_drift"] = r.trace_drift;
      c["fidelity"] = to_json(r.fidelity);
    } else {
      c["error"] = r.error;
    }
    cells.push_back(c);
  }
  return {{"config_hash", config_hash(cfg)},
          {"config", to_json(cfg)},
          {"csv_schema", kSweepCsvHeader},
          {"cells", cells}};
}

/// A pair of neighbouring cells where fidelity drops as a decoherence time
/// grows.
struct MonotonicityViolation {
  const SweepResult* lower;  // shorter T or kappa_inv
  const SweepResult* upper;
  std::string axis;         // "T" or "kappa_inv"
};

/// Checks that fidelity is non-decreasing in T at fixed kappa_inv and in
/// kappa_inv at fixed T. Failed cells count as violations.
inline std::vector<MonotonicityViolation> monotonicity_violations(
    const std::vector<SweepResult>& rows, std::size_t n_T, std::size_t n_kappa) {
  if (rows.size() != n_T * n_kappa) {
    throw std::invalid_argument("monotonicity check: grid shape does not match rows");
  }
  std::vector<MonotonicityViolation> out;
  auto at = [&](std::size_t i, std::size_t j) -> const SweepResult& {
    return rows[i * n_kappa + j];
  };
  auto bad = [](const SweepResult& a, const SweepResult& b) {
    return !a.ok() || !b.ok() || !(b.mean_fidelity >= a.mean_fidelity);
  };
  for (std::size_t i = 0; i < n_T; ++i) {
    for (std::size_t j = 0; j < n_kappa; ++j) {
      if (i + 1 < n_T && bad(at(i, j), at(i + 1, j))) {
        out.push_back({&at(i, j), &at(i + 1, j), "T"});
      }
      if (j + 1 < n_kappa && bad(at(i, j), at(i, j + 1))) {
        out.push_back({&at(i, j), &at(i, j + 1), "kappa_inv"});
      }
    }
  }
  return out;
}

}  // namespace catgate
