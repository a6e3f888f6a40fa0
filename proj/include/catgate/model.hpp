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

// Physical parameters, the dispersive coefficient layer and gate design.
//
// Units: every frequency held by SystemParams / DerivedQuantities is an
// angular frequency in rad/ns, every time is in ns. Inputs quoted as linear
// "/2pi" values in GHz go through ghz() exactly once. Decoherence rates are
// kept in 1/us, the unit they are specified in.

#include "catgate/hilbert.hpp"
#include "catgate/numkernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace catgate {

/// Linear frequency in GHz to angular frequency in rad/ns.
constexpr double ghz(double linear_ghz) { return kTwoPi * linear_ghz; }
/// Angular rad/ns back to linear GHz.
constexpr double to_ghz(double angular) { return angular / kTwoPi; }
constexpr double to_mhz(double angular) { return 1e3 * angular / kTwoPi; }

struct SystemParams {
  double omega_eg = 0.0;
  double omega_fe = 0.0;
  double omega_fg = 0.0;
  double omega_c1 = 0.0;
  double omega_c2 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g1_tilde = 0.0;
  double g2_tilde = 0.0;
  double cat_amplitude = 0.5;
  SpaceSpec space{};

  [[nodiscard]] double delta1() const { return omega_fg - omega_c1; }
  [[nodiscard]] double delta2() const { return omega_fe - omega_c2; }
  [[nodiscard]] double delta1_tilde() const { return omega_fe - omega_c1; }
  [[nodiscard]] double delta2_tilde() const { return omega_fg - omega_c2; }

  void validate() const {
    space.validate();
    const double scale = std::max({std::abs(omega_fg), std::abs(omega_eg),
                                   std::abs(omega_fe), 1.0});
    if (std::abs(omega_fg - (omega_eg + omega_fe)) > 1e-12 * scale) {
      throw std::invalid_argument(
          "omega_fg must equal omega_eg + omega_fe (three-level consistency)");
    }
    if (!(delta1() > 0.0)) {
      throw std::invalid_argument("delta1: detuning must be positive");
    }
    if (!(delta2() > 0.0)) {
      throw std::invalid_argument("delta2: detuning must be positive");
    }
    if (g1 < 0.0 || g2 < 0.0 || g1_tilde < 0.0 || g2_tilde < 0.0) {
      throw std::invalid_argument("coupling strengths must be >= 0");
    }
    if (!(cat_amplitude > 0.0)) {
      throw std::invalid_argument("cat_amplitude must be > 0");
    }
  }
};

struct DerivedQuantities {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta1_tilde = 0.0;
  double delta2_tilde = 0.0;
  double Delta = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda = 0.0;
  double chi = 0.0;
  double eta = 0.0;
  int k = 1;
  double t_gate = 0.0;  // ns
};

/// Rates in 1/us.
struct DecoherenceParams {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma_eg = 0.0;
  double gamma_fe = 0.0;
  double gamma_fg = 0.0;
  double gamma_phi_e = 0.0;
  double gamma_phi_f = 0.0;

  void validate() const {
    for (double r : {kappa1, kappa2, gamma_eg, gamma_fe, gamma_fg, gamma_phi_e,
                     gamma_phi_f}) {
      if (!(r >= 0.0)) throw std::invalid_argument("decay rates must be >= 0");
    }
  }

  [[nodiscard]] bool all_zero() const {
    return kappa1 == 0.0 && kappa2 == 0.0 && gamma_eg == 0.0 &&
           gamma_fe == 0.0 && gamma_fg == 0.0 && gamma_phi_e == 0.0 &&
           gamma_phi_f == 0.0;
  }
};

/// g2 such that chi t = pi and eta t = 2 k pi hold simultaneously.
/// Homogeneous of degree one, so any consistent frequency unit works.
inline double solve_g2(double delta1, double delta2, double Delta, int k) {
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  if (!(delta1 > 0.0) || !(delta2 > 0.0) || !(Delta > 0.0)) {
    throw std::invalid_argument("solve_g2: detunings must be positive");
  }
  return (2.0 * delta2 / (delta1 + delta2)) *
         std::sqrt(delta1 * Delta / (2.0 * k - 1.0));
}

/// The k in [1, k_max] whose solve_g2 value lies closest to target_g2.
inline int scan_k(double delta1, double delta2, double Delta, double target_g2,
                  int k_max = 32) {
  int best = 1;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double err = std::abs(solve_g2(delta1, delta2, Delta, k) - target_g2);
    if (err < best_err) {
      best_err = err;
      best = k;
    }
  }
  return best;
}

inline DerivedQuantities derive(const SystemParams& p, int k) {
  if (k < 1) throw std::invalid_argument("k must be a positive integer");
  DerivedQuantities d;
  d.k = k;
  d.delta1 = p.delta1();
  d.delta2 = p.delta2();
  d.delta1_tilde = p.delta1_tilde();
  d.delta2_tilde = p.delta2_tilde();
  d.Delta = d.delta2 - d.delta1;
  if (!(d.delta1 > 0.0) || !(d.delta2 > 0.0)) {
    throw std::invalid_argument("derive: detuning must be positive");
  }
  if (!(d.Delta > 0.0)) {
    throw std::invalid_argument("derive: Delta = delta2 - delta1 must be positive");
  }
  d.lambda1 = p.g1 * p.g1 / d.delta1;
  d.lambda2 = p.g2 * p.g2 / d.delta2;
  d.lambda = 0.5 * p.g1 * p.g2 * (1.0 / d.delta1 + 1.0 / d.delta2);
  d.chi = d.lambda * d.lambda / d.Delta;
  d.eta = d.lambda1 + d.chi;
  if (!(d.chi > 0.0)) {
    throw std::domain_error("derive: chi = 0, gate time undefined");
  }
  d.t_gate = kPi / d.chi;
  return d;
}

struct ValidityRatio {
  std::string name;
  double value = 0.0;
  bool warning = false;
};

struct ValidityReport {
  std::vector<ValidityRatio> ratios;
  [[nodiscard]] bool any_warning() const {
    for (const auto& r : ratios) {
      if (r.warning) return true;
    }
    return false;
  }
};

inline constexpr double kValidityWarnRatio = 5.0;

/// Large-detuning diagnostics; a ratio below 5 is flagged.
inline ValidityReport validity_report(const SystemParams& p,
                                      const DerivedQuantities& d) {
  ValidityReport report;
  auto add = [&](std::string name, double num, double den) {
    const double v = den == 0.0 ? std::numeric_limits<double>::infinity()
                                : std::abs(num) / den;
    report.ratios.push_back({std::move(name), v, v < kValidityWarnRatio});
  };
  add("delta1/g1", d.delta1, p.g1);
  add("delta2/g2", d.delta2, p.g2);
  add("Delta/lambda1", d.Delta, d.lambda1);
  add("Delta/lambda2", d.Delta, d.lambda2);
  add("Delta/lambda", d.Delta, d.lambda);
  add("|delta1_tilde|/g1_tilde", d.delta1_tilde, p.g1_tilde);
  add("delta2_tilde/g2_tilde", d.delta2_tilde, p.g2_tilde);
  return report;
}

/// Q_l = omega_cl * kappa^-1 (kappa^-1 in us).
inline std::pair<double, double> quality_factors(const SystemParams& p,
                                                 double kappa_inv_us) {
  const double t_ns = kappa_inv_us * 1e3;
  return {p.omega_c1 * t_ns, p.omega_c2 * t_ns};
}

/// Reference operating point: qutrit 5.0 / 7.5 / 12.5 GHz, detunings 1.5 and
/// 1.65 GHz, g1 = 150 MHz, g2 from solve_g2 with k = 6, unwanted couplings
/// equal to the wanted ones, cat amplitude 0.5.
inline SystemParams reference_params(int k = 6) {
  SystemParams p;
  p.omega_eg = ghz(5.0);
  p.omega_fe = ghz(7.5);
  p.omega_fg = ghz(12.5);
  p.omega_c1 = p.omega_fg - ghz(1.5);
  p.omega_c2 = p.omega_fe - ghz(1.65);
  p.g1 = ghz(0.150);
  p.g2 = solve_g2(p.delta1(), p.delta2(), p.delta2() - p.delta1(), k);
  p.g1_tilde = p.g1;
  p.g2_tilde = p.g2;
  p.cat_amplitude = 0.5;
  p.space = SpaceSpec{6, 12};
  return p;
}

}  // namespace catgate
