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

#include "catgate/analysis.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>

namespace catgate {

inline constexpr double kConvergenceTolerance = 1e-4;

struct ConvergenceReport {
  int quadrature_n = 0;
  double tolerance = kConvergenceTolerance;
  double baseline = 0.0;
  double half_step = 0.0;        // phase_per_step / 2
  double larger_space = 0.0;     // n1_trunc + 2, n2_trunc + 4
  double step_delta = 0.0;
  double truncation_delta = 0.0;
  bool truncation_ok = true;     // cat tail fits the baseline truncation
  bool passed = false;
  std::string message;
};

/// Re-runs the scenario's average fidelity with half the step and with
/// larger Fock cutoffs. Passes when both changes stay below the tolerance.
/// A baseline truncation that cannot hold the cat states fails immediately.
inline ConvergenceReport convergence_probe(const GateScenario& sc, int quadrature_n = 4,
                                           int workers = 1,
                                           double tolerance = kConvergenceTolerance) {
  ConvergenceReport r;
  r.quadrature_n = quadrature_n;
  r.tolerance = tolerance;
  const int n2 = sc.params.space.n2_trunc;
  const double amp = sc.params.cat_amplitude;
  const double tail = std::max(cat_tail_mass(amp, Parity::even, n2),
                               cat_tail_mass(amp, Parity::odd, n2));
  if (tail > kCatTailTolerance) {
    std::ostringstream msg;
    msg << "truncation failure: cat tail mass " << tail << " above " << kCatTailTolerance
        << " at n2_trunc = " << n2 << ", amplitude " << amp;
    r.truncation_ok = false;
    r.message = msg.str();
    return r;
  }

  r.baseline = fidelity_average(sc, quadrature_n, workers).mean_fidelity;

  GateScenario fine = sc;
  fine.phase_per_step = 0.5 * sc.phase_per_step;
  r.half_step = fidelity_average(fine, quadrature_n, workers).mean_fidelity;

  GateScenario big = sc;
  big.params.space.n1_trunc += 2;
  big.params.space.n2_trunc += 4;
  r.larger_space = fidelity_average(big, quadrature_n, workers).mean_fidelity;

  r.step_delta = std::abs(r.half_step - r.baseline);
  r.truncation_delta = std::abs(r.larger_space - r.baseline);
  r.passed = r.step_delta < tolerance && r.truncation_delta < tolerance;
  std::ostringstream msg;
  msg << (r.passed ? "converged" : "not converged") << ": step delta " << r.step_delta
      << ", truncation delta " << r.truncation_delta << " (tolerance " << tolerance << ")";
  r.message = msg.str();
  return r;
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  return {{"quadrature_n", r.quadrature_n},
          {"tolerance", r.tolerance},
          {"baseline", r.baseline},
          {"half_step", r.half_step},
          {"larger_space", r.larger_space},
          {"step_delta", r.step_delta},
          {"truncation_delta", r.truncation_delta},
          {"truncation_ok", r.truncation_ok},
          {"passed", r.passed},
          {"message", r.message}};
}

}  // namespace catgate
