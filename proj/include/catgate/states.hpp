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

// Fock, coherent and cat states, and the logical two-qubit states of the
// hybrid gate. Logical basis order everywhere:
//   0: |0>|cat>   1: |0>|cat_bar>   2: |1>|cat>   3: |1>|cat_bar>
// with the qutrit in |g>.

#include "catgate/hilbert.hpp"
#include "catgate/numkernel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace catgate {

using StateVector = ComplexVector;
using DensityMatrix = ComplexMatrix;

enum class Parity { even, odd };

struct CatSpec {
  double amplitude = 0.5;
  Parity parity = Parity::even;
  int trunc = 12;
};

/// Superposition angles of the logical input state. Named theta/phi so they
/// cannot be confused with the cat amplitude.
struct LogicalAngles {
  double theta = 0.0;
  double phi = 0.0;

  void validate() const {
    auto ok = [](double x) { return x >= 0.0 && x < kTwoPi; };
    if (!ok(theta) || !ok(phi)) {
      throw std::invalid_argument("logical angles must lie in [0, 2pi)");
    }
  }
};

/// Cat tail mass above which a truncation is rejected.
inline constexpr double kCatTailTolerance = 1e-12;

inline StateVector fock_state(int n_trunc, int n) {
  if (n < 0 || n >= n_trunc) {
    throw std::out_of_range("Fock index " + std::to_string(n) +
                            " outside truncation " + std::to_string(n_trunc));
  }
  StateVector v = StateVector::Zero(n_trunc);
  v(n) = 1.0;
  return v;
}

/// Truncated coherent state e^{-|a|^2/2} sum a^n/sqrt(n!) |n>, not
/// renormalized.
inline StateVector coherent_state(Complex alpha, int n_trunc) {
  StateVector v(n_trunc);
  Complex term = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < n_trunc; ++n) {
    if (n > 0) term *= alpha / std::sqrt(double(n));
    v(n) = term;
  }
  return v;
}

namespace detail {

// Untruncated cat coefficient C_n for real amplitude, n of the cat's parity.
inline double cat_coefficient(double amplitude, Parity parity, int n) {
  const double a2 = amplitude * amplitude;
  const double sign = parity == Parity::even ? 1.0 : -1.0;
  const double m = 1.0 / std::sqrt(2.0 * (1.0 + sign * std::exp(-2.0 * a2)));
  if (amplitude == 0.0) return n == 0 ? 2.0 * m : 0.0;
  const double log_mag = n * std::log(amplitude) - 0.5 * std::lgamma(n + 1.0);
  return 2.0 * m * std::exp(-0.5 * a2 + log_mag);
}

inline bool parity_matches(Parity parity, int n) {
  return (n % 2 == 0) == (parity == Parity::even);
}

}  // namespace detail

/// Probability weight the untruncated cat places on Fock states >= trunc.
inline double cat_tail_mass(double amplitude, Parity parity, int trunc) {
  double tail = 0.0;
  for (int n = trunc; n < trunc + 400; ++n) {
    if (!detail::parity_matches(parity, n)) continue;
    const double c = detail::cat_coefficient(amplitude, parity, n);
    tail += c * c;
    if (c * c < 1e-30 && n > amplitude * amplitude + 10) break;
  }
  return tail;
}

/// Even (|cat>) or odd (|cat_bar>) cat state on a truncated Fock basis,
/// renormalized over the kept levels. Coefficients are real and positive for
/// positive amplitude; wrong-parity entries are exactly zero.
inline StateVector cat_state(const CatSpec& spec) {
  if (!(spec.amplitude >= 0.0)) {
    throw std::invalid_argument("cat amplitude must be >= 0");
  }
  if (spec.parity == Parity::odd && spec.amplitude == 0.0) {
    throw std::invalid_argument("odd cat state is undefined at amplitude 0");
  }
  if (spec.trunc < 2) throw std::invalid_argument("cat truncation must be >= 2");
  const double tail = cat_tail_mass(spec.amplitude, spec.parity, spec.trunc);
  if (tail > kCatTailTolerance) {
    throw std::invalid_argument(
        "truncation " + std::to_string(spec.trunc) +
        " too small for cat amplitude " + std::to_string(spec.amplitude) +
        " (tail mass " + std::to_string(tail) + ")");
  }
  StateVector v = StateVector::Zero(spec.trunc);
  for (int n = 0; n < spec.trunc; ++n) {
    if (detail::parity_matches(spec.parity, n)) {
      v(n) = detail::cat_coefficient(spec.amplitude, spec.parity, n);
    }
  }
  return v / v.norm();
}

/// The four logical basis states on cavity 1 (x) cavity 2 only.
inline std::array<StateVector, 4> cavity_logical_basis(double cat_amplitude,
                                                       const SpaceSpec& space) {
  space.validate();
  const StateVector cat = cat_state({cat_amplitude, Parity::even, space.n2_trunc});
  const StateVector cat_bar =
      cat_state({cat_amplitude, Parity::odd, space.n2_trunc});
  const StateVector zero = fock_state(space.n1_trunc, 0);
  const StateVector one = fock_state(space.n1_trunc, 1);
  auto k = [](const StateVector& a, const StateVector& b) -> StateVector {
    return kron(a, b);
  };
  return {k(zero, cat), k(zero, cat_bar), k(one, cat), k(one, cat_bar)};
}

/// |g> (x) v for a cavity-pair vector v.
inline StateVector with_qutrit_ground(const StateVector& cavities) {
  StateVector g = StateVector::Zero(SpaceSpec::qutrit_dim);
  g(int(QutritLevel::g)) = 1.0;
  return kron(g, cavities);
}

inline std::array<StateVector, 4> logical_basis(double cat_amplitude,
                                                const SpaceSpec& space) {
  auto cav = cavity_logical_basis(cat_amplitude, space);
  std::array<StateVector, 4> out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = with_qutrit_ground(cav[i]);
  return out;
}

/// Coefficients of the logical input in the logical basis.
inline std::array<double, 4> input_coefficients(const LogicalAngles& a) {
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const double cp = std::cos(a.phi), sp = std::sin(a.phi);
  return {ct * cp, ct * sp, st * cp, st * sp};
}

/// Same as input_coefficients with the |1>|cat_bar> sign flipped.
inline std::array<double, 4> ideal_coefficients(const LogicalAngles& a) {
  auto c = input_coefficients(a);
  c[3] = -c[3];
  return c;
}

inline StateVector combine(const std::array<StateVector, 4>& basis,
                           const std::array<double, 4>& coeffs) {
  StateVector out = StateVector::Zero(basis[0].size());
  for (std::size_t i = 0; i < 4; ++i) out += coeffs[i] * basis[i];
  return out;
}

inline StateVector logical_input(const LogicalAngles& angles,
                                 double cat_amplitude, const SpaceSpec& space) {
  angles.validate();
  return combine(logical_basis(cat_amplitude, space), input_coefficients(angles));
}

inline StateVector ideal_output(const LogicalAngles& angles,
                                double cat_amplitude, const SpaceSpec& space) {
  angles.validate();
  return combine(logical_basis(cat_amplitude, space), ideal_coefficients(angles));
}

inline DensityMatrix density_from_pure(const StateVector& psi) {
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    throw std::invalid_argument("density_from_pure: state is not normalized "
                                "(norm " + std::to_string(norm) + ")");
  }
  return psi * psi.adjoint();
}

}  // namespace catgate
