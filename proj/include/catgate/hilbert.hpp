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

// Tensor-product space qutrit (x) cavity 1 (x) cavity 2 and its embedded
// operators. The ordering is fixed everywhere: the qutrit index is the most
// significant, cavity 2 the least.

#include "catgate/numkernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace catgate {

enum class QutritLevel : int { g = 0, e = 1, f = 2 };

enum class QutritOp {
  proj_g,
  proj_e,
  proj_f,
  sigma_fg_minus,  // |g><f|
  sigma_fe_minus,  // |e><f|
  sigma_eg_minus,  // |g><e|
};

struct SpaceSpec {
  static constexpr int qutrit_dim = 3;
  int n1_trunc = 6;
  int n2_trunc = 12;

  void validate() const {
    if (n1_trunc < 2) {
      throw std::invalid_argument("n1_trunc must be >= 2 (got " +
                                  std::to_string(n1_trunc) + ")");
    }
    if (n2_trunc < 2) {
      throw std::invalid_argument("n2_trunc must be >= 2 (got " +
                                  std::to_string(n2_trunc) + ")");
    }
  }

  [[nodiscard]] int cavity_dim() const { return n1_trunc * n2_trunc; }
  [[nodiscard]] int dim() const { return qutrit_dim * n1_trunc * n2_trunc; }

  friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;
};

struct BasisLabel {
  QutritLevel level = QutritLevel::g;
  int n1 = 0;
  int n2 = 0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// Truncated single-mode annihilation operator, <n-1|a|n> = sqrt(n).
inline ComplexMatrix single_mode_annihilation(int n_trunc) {
  if (n_trunc < 1) throw std::invalid_argument("n_trunc must be >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(n_trunc, n_trunc);
  for (int n = 1; n < n_trunc; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

inline ComplexMatrix single_mode_number(int n_trunc) {
  ComplexMatrix n = ComplexMatrix::Zero(n_trunc, n_trunc);
  for (int k = 0; k < n_trunc; ++k) n(k, k) = double(k);
  return n;
}

/// The bare 3x3 qutrit matrix for `kind`.
inline ComplexMatrix qutrit_matrix(QutritOp kind) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  const auto g = int(QutritLevel::g), e = int(QutritLevel::e),
             f = int(QutritLevel::f);
  switch (kind) {
    case QutritOp::proj_g: m(g, g) = 1.0; break;
    case QutritOp::proj_e: m(e, e) = 1.0; break;
    case QutritOp::proj_f: m(f, f) = 1.0; break;
    case QutritOp::sigma_fg_minus: m(g, f) = 1.0; break;
    case QutritOp::sigma_fe_minus: m(e, f) = 1.0; break;
    case QutritOp::sigma_eg_minus: m(g, e) = 1.0; break;
    default: throw std::invalid_argument("unknown qutrit operator kind");
  }
  return m;
}

/// qutrit (x) c1 (x) c2 with the given single-slot factors.
inline ComplexMatrix embed(const ComplexMatrix& qutrit,
                           const ComplexMatrix& cavity1,
                           const ComplexMatrix& cavity2) {
  return kron(kron(qutrit, cavity1), cavity2);
}

inline ComplexMatrix annihilation(const SpaceSpec& space, int cavity) {
  space.validate();
  const auto iq = identity(SpaceSpec::qutrit_dim);
  if (cavity == 1) {
    return embed(iq, single_mode_annihilation(space.n1_trunc),
                 identity(space.n2_trunc));
  }
  if (cavity == 2) {
    return embed(iq, identity(space.n1_trunc),
                 single_mode_annihilation(space.n2_trunc));
  }
  throw std::invalid_argument("cavity index must be 1 or 2 (got " +
                              std::to_string(cavity) + ")");
}

inline ComplexMatrix creation(const SpaceSpec& space, int cavity) {
  return annihilation(space, cavity).adjoint();
}

inline ComplexMatrix number_op(const SpaceSpec& space, int cavity) {
  const ComplexMatrix a = annihilation(space, cavity);
  return a.adjoint() * a;
}

inline ComplexMatrix qutrit_op(const SpaceSpec& space, QutritOp kind) {
  space.validate();
  return embed(qutrit_matrix(kind), identity(space.n1_trunc),
               identity(space.n2_trunc));
}

inline int basis_index(const SpaceSpec& space, QutritLevel level, int n1,
                       int n2) {
  const int q = int(level);
  if (q < 0 || q >= SpaceSpec::qutrit_dim) {
    throw std::out_of_range("qutrit level out of range");
  }
  if (n1 < 0 || n1 >= space.n1_trunc) {
    throw std::out_of_range("cavity-1 Fock index " + std::to_string(n1) +
                            " outside truncation " +
                            std::to_string(space.n1_trunc));
  }
  if (n2 < 0 || n2 >= space.n2_trunc) {
    throw std::out_of_range("cavity-2 Fock index " + std::to_string(n2) +
                            " outside truncation " +
                            std::to_string(space.n2_trunc));
  }
  return (q * space.n1_trunc + n1) * space.n2_trunc + n2;
}

inline BasisLabel decode_index(const SpaceSpec& space, int index) {
  if (index < 0 || index >= space.dim()) {
    throw std::out_of_range("basis index out of range");
  }
  BasisLabel label;
  label.n2 = index % space.n2_trunc;
  index /= space.n2_trunc;
  label.n1 = index % space.n1_trunc;
  label.level = QutritLevel(index / space.n1_trunc);
  return label;
}

/// n1 + n2 + |f><f|. Every coupling term trades one photon for a decay out
/// of |f>, or moves a photon between the cavities through e-g.
inline ComplexMatrix excitation_number(const SpaceSpec& space) {
  return number_op(space, 1) + number_op(space, 2) +
         qutrit_op(space, QutritOp::proj_f);
}

}  // namespace catgate
