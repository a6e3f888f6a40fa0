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

// Interaction-picture and effective Hamiltonians of the qutrit-mediated
// two-cavity system. A time-dependent Hamiltonian is a sum of static
// operators each carrying a phase rate w:
//
//   H(t) = sum_k  e^{i w_k t} O_k  (+ h.c. when includes_hc)
//
// so the coupling e^{-i delta t} a^+ sigma^- + h.c. is the term
// {g a^+ sigma^-, -delta, true}.

#include "catgate/hilbert.hpp"
#include "catgate/model.hpp"
#include "catgate/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace catgate {

struct HamiltonianTerm {
  ComplexMatrix op;
  double phase_rate = 0.0;  // rad/ns
  bool includes_hc = true;
};

class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian() = default;
  explicit TimeDependentHamiltonian(Eigen::Index dim) : dim_(dim) {}

  void add(HamiltonianTerm term) {
    require_square(term.op, "HamiltonianTerm");
    if (dim_ == 0) dim_ = term.op.rows();
    if (term.op.rows() != dim_) {
      throw std::invalid_argument("HamiltonianTerm: dimension mismatch");
    }
    if (!term.includes_hc &&
        (term.phase_rate != 0.0 || !is_hermitian(term.op, 1e-12))) {
      throw std::invalid_argument(
          "a term without h.c. must be static and Hermitian");
    }
    terms_.push_back(std::move(term));
  }

  void add_static(const ComplexMatrix& op) { add({op, 0.0, false}); }

  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] const std::vector<HamiltonianTerm>& terms() const {
    return terms_;
  }

  [[nodiscard]] ComplexMatrix evaluate(double t) const {
    ComplexMatrix h = ComplexMatrix::Zero(dim_, dim_);
    for (const auto& term : terms_) {
      const Complex phase = std::polar(1.0, term.phase_rate * t);
      if (term.includes_hc) {
        const ComplexMatrix x = phase * term.op;
        h += x;
        h += x.adjoint();
      } else {
        h += term.op;
      }
    }
    return h;
  }

  /// Largest |phase rate| among terms, the rate an integrator must resolve.
  [[nodiscard]] double max_phase_rate() const {
    double w = 0.0;
    for (const auto& term : terms_) w = std::max(w, std::abs(term.phase_rate));
    return w;
  }

  friend TimeDependentHamiltonian operator+(TimeDependentHamiltonian a,
                                            const TimeDependentHamiltonian& b) {
    for (const auto& term : b.terms_) a.add(term);
    return a;
  }

 private:
  Eigen::Index dim_ = 0;
  std::vector<HamiltonianTerm> terms_;
};

inline TimeDependentHamiltonian static_hamiltonian(const ComplexMatrix& h) {
  TimeDependentHamiltonian out(h.rows());
  out.add_static(h);
  return out;
}

/// g1 (e^{-i d1 t} a1^+ s_fg^- + h.c.) + g2 (e^{-i d2 t} a2^+ s_fe^- + h.c.)
inline TimeDependentHamiltonian build_h_interaction(const SystemParams& p) {
  const auto& s = p.space;
  TimeDependentHamiltonian h(s.dim());
  h.add({p.g1 * creation(s, 1) * qutrit_op(s, QutritOp::sigma_fg_minus),
         -p.delta1(), true});
  h.add({p.g2 * creation(s, 2) * qutrit_op(s, QutritOp::sigma_fe_minus),
         -p.delta2(), true});
  return h;
}

/// Unwanted couplings: cavity 1 to e-f and cavity 2 to g-f.
inline TimeDependentHamiltonian build_delta_h(const SystemParams& p) {
  const auto& s = p.space;
  TimeDependentHamiltonian h(s.dim());
  h.add({p.g1_tilde * creation(s, 1) * qutrit_op(s, QutritOp::sigma_fe_minus),
         -p.delta1_tilde(), true});
  h.add({p.g2_tilde * creation(s, 2) * qutrit_op(s, QutritOp::sigma_fg_minus),
         -p.delta2_tilde(), true});
  return h;
}

/// H_I + dH.
inline TimeDependentHamiltonian build_h_full(const SystemParams& p) {
  return build_h_interaction(p) + build_delta_h(p);
}

namespace detail {

// Stark-shift diagonal shared by the first two effective stages.
inline ComplexMatrix stark_diagonal(const SpaceSpec& s,
                                    const DerivedQuantities& d) {
  const ComplexMatrix n1 = number_op(s, 1), n2 = number_op(s, 2);
  const ComplexMatrix pg = qutrit_op(s, QutritOp::proj_g);
  const ComplexMatrix pe = qutrit_op(s, QutritOp::proj_e);
  const ComplexMatrix pf = qutrit_op(s, QutritOp::proj_f);
  const ComplexMatrix id = identity(s.dim());
  return -d.lambda1 * n1 * pg - d.lambda2 * n2 * pe +
         ((d.lambda1 + d.lambda2) * id + d.lambda1 * n1 + d.lambda2 * n2) * pf;
}

}  // namespace detail

/// Stark shifts plus the cavity-cavity exchange through e-g,
/// -lambda (e^{i Delta t} a1^+ a2 s_eg^- + h.c.).
inline TimeDependentHamiltonian build_h_eff_stage1(const SystemParams& p,
                                                   const DerivedQuantities& d) {
  const auto& s = p.space;
  TimeDependentHamiltonian h(s.dim());
  h.add_static(detail::stark_diagonal(s, d));
  h.add({-d.lambda * creation(s, 1) * annihilation(s, 2) *
             qutrit_op(s, QutritOp::sigma_eg_minus),
         d.Delta, true});
  return h;
}

/// Static, diagonal: stage-1 Stark shifts plus the cross-Kerr terms
/// -chi n1 (1 + n2) |g><g| + chi (1 + n1) n2 |e><e|.
inline ComplexMatrix build_h_eff_stage2(const SystemParams& p,
                                        const DerivedQuantities& d) {
  const auto& s = p.space;
  const ComplexMatrix n1 = number_op(s, 1), n2 = number_op(s, 2);
  const ComplexMatrix id = identity(s.dim());
  return detail::stark_diagonal(s, d) -
         d.chi * n1 * (id + n2) * qutrit_op(s, QutritOp::proj_g) +
         d.chi * (id + n1) * n2 * qutrit_op(s, QutritOp::proj_e);
}

/// Stage 2 restricted to the |g> block:
/// -lambda1 n1 |g><g| - chi n1 (1 + n2) |g><g|.
inline ComplexMatrix build_h_eff_reduced(const SystemParams& p,
                                         const DerivedQuantities& d) {
  const auto& s = p.space;
  const ComplexMatrix n1 = number_op(s, 1), n2 = number_op(s, 2);
  const ComplexMatrix id = identity(s.dim());
  return (-d.lambda1 * n1 - d.chi * n1 * (id + n2)) *
         qutrit_op(s, QutritOp::proj_g);
}

/// Two-cavity effective Hamiltonian -eta n1 - chi n1 n2 on c1 (x) c2.
inline ComplexMatrix build_h_eff_two_mode(const DerivedQuantities& d,
                                          const SpaceSpec& s) {
  const ComplexMatrix n1 =
      kron(single_mode_number(s.n1_trunc), identity(s.n2_trunc));
  const ComplexMatrix n2 =
      kron(identity(s.n1_trunc), single_mode_number(s.n2_trunc));
  return -d.eta * n1 - d.chi * n1 * n2;
}

/// exp(i eta n1 t) (x) exp(i chi n1 n2 t), built diagonally on c1 (x) c2.
inline ComplexMatrix closed_form_gate_unitary(const DerivedQuantities& d,
                                              const SpaceSpec& s, double t) {
  if (t < 0.0) throw std::invalid_argument("gate time must be >= 0");
  s.validate();
  ComplexMatrix u = ComplexMatrix::Zero(s.cavity_dim(), s.cavity_dim());
  for (int n1 = 0; n1 < s.n1_trunc; ++n1) {
    for (int n2 = 0; n2 < s.n2_trunc; ++n2) {
      const int i = n1 * s.n2_trunc + n2;
      const double phase = (d.eta * n1 + d.chi * n1 * n2) * t;
      u(i, i) = std::polar(1.0, phase);
    }
  }
  return u;
}

}  // namespace catgate
