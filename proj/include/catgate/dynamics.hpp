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

// Fixed-step RK4 propagation of state vectors (Schroedinger equation) and
// density matrices (Lindblad master equation) under time-dependent
// Hamiltonians.
//
// Units: Hamiltonians in rad/ns, times in ns, decoherence rates in 1/us
// (converted to 1/ns when a ChannelSet is built).
//
// The propagators never form H(t) densely. Every term is compiled once into
// its nonzero entries; H(t) rho is then a list of column axpys on the dense
// rho. For Hermitian rho the right-hand side is evaluated as
//
//   B = rho H_eff^+,   H_eff = H - (i/2) sum_k g_k L_k^+ L_k
//   drho/dt = i (B - B^+) + sum_k g_k L_k rho L_k^+
//
// which equals -i[H, rho] + sum_k g_k D[L_k] rho exactly.

#include "catgate/hamiltonians.hpp"
#include "catgate/hilbert.hpp"
#include "catgate/model.hpp"
#include "catgate/numkernel.hpp"
#include "catgate/states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace catgate {

/// Hard ceiling on the phase a Hamiltonian term may advance per step.
inline constexpr double kMaxPhasePerStep = 0.3;
/// Default step: the fastest term advances at most this many radians.
inline constexpr double kDefaultPhasePerStep = 0.05;
/// Minimum-eigenvalue floor for density matrices.
inline constexpr double kPositivityTolerance = -1e-6;

struct PropagationConfig {
  double dt = 0.0;       // ns
  double t_final = 0.0;  // ns
  int record_stride = 0;  // 0: record only the initial and final point
  bool renormalize = false;
  int positivity_check_stride = 1000;
  bool store_states = false;  // keep every recorded rho / psi

  [[nodiscard]] long steps() const {
    return t_final <= 0.0 ? 0 : std::lround(std::ceil(t_final / dt - 1e-9));
  }

  /// Throws NumericalError if dt violates the step-size invariant for a
  /// Hamiltonian whose fastest term rotates at max_phase_rate.
  void validate(double max_phase_rate) const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (t_final < 0.0) throw std::invalid_argument("t_final must be >= 0");
    if (positivity_check_stride < 1) {
      throw std::invalid_argument("positivity_check_stride must be >= 1");
    }
    const double phase = dt * max_phase_rate;
    if (phase > kMaxPhasePerStep * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "step-size invariant violated: dt * max phase rate = " << phase
          << " rad > " << kMaxPhasePerStep;
      throw NumericalError(msg.str());
    }
  }
};

/// Step configuration that lands exactly on t_final with the fastest term
/// advancing at most `phase_per_step` rad per step. `rate_floor` bounds the
/// step for Hamiltonians without oscillating terms (use an estimate of |H|).
inline PropagationConfig step_config(double t_final, double max_phase_rate,
                                     double phase_per_step = kDefaultPhasePerStep,
                                     double rate_floor = 1.0) {
  if (!(phase_per_step > 0.0)) {
    throw std::invalid_argument("phase_per_step must be positive");
  }
  const double rate = std::max(max_phase_rate, rate_floor);
  PropagationConfig cfg;
  cfg.t_final = t_final;
  const long n =
      t_final <= 0.0 ? 1 : std::max(1L, long(std::ceil(t_final * rate / phase_per_step - 1e-9)));
  cfg.dt = t_final <= 0.0 ? phase_per_step / rate : t_final / double(n);
  return cfg;
}

// ---------------------------------------------------------------------------
// Decoherence channels

/// Qutrit rates for the scale T (us): 1/gamma_eg = 5T, 1/gamma_fe = 2T,
/// 1/gamma_fg = T, 1/gamma_phi_e = 1/gamma_phi_f = T. Cavity rates are zero.
inline DecoherenceParams rates_from_T(double T_us) {
  if (!(T_us > 0.0)) throw std::invalid_argument("T must be positive");
  DecoherenceParams r;
  r.gamma_eg = 1.0 / (5.0 * T_us);
  r.gamma_fe = 1.0 / (2.0 * T_us);
  r.gamma_fg = 1.0 / T_us;
  r.gamma_phi_e = 1.0 / T_us;
  r.gamma_phi_f = 1.0 / T_us;
  return r;
}

/// rates_from_T(T) with kappa1 = kappa2 = 1 / kappa_inv. Infinite arguments
/// switch the corresponding channels off.
inline DecoherenceParams decoherence_for(double T_us, double kappa_inv_us) {
  if (!(kappa_inv_us > 0.0)) {
    throw std::invalid_argument("kappa_inv must be positive");
  }
  DecoherenceParams r = std::isinf(T_us) ? DecoherenceParams{} : rates_from_T(T_us);
  const double kappa = std::isinf(kappa_inv_us) ? 0.0 : 1.0 / kappa_inv_us;
  r.kappa1 = kappa;
  r.kappa2 = kappa;
  return r;
}

struct Channel {
  std::string name;
  ComplexMatrix op;  // collapse operator L
  double rate = 0.0;  // 1/ns
};

/// Collapse operators with rates, in the order a1, a2, s_eg, s_fe, s_fg,
/// s_ee, s_ff. Dephasing gamma (s rho s - {s, rho}/2) with s a projector is
/// the dissipator D[s]. Zero-rate channels are dropped.
struct ChannelSet {
  std::vector<Channel> channels;

  [[nodiscard]] bool empty() const { return channels.empty(); }

  static ChannelSet from(const DecoherenceParams& r, const SpaceSpec& s) {
    r.validate();
    ChannelSet set;
    auto add = [&](std::string name, double rate_per_us, ComplexMatrix op) {
      if (rate_per_us > 0.0) {
        set.channels.push_back({std::move(name), std::move(op), rate_per_us * 1e-3});
      }
    };
    add("kappa1", r.kappa1, annihilation(s, 1));
    add("kappa2", r.kappa2, annihilation(s, 2));
    add("gamma_eg", r.gamma_eg, qutrit_op(s, QutritOp::sigma_eg_minus));
    add("gamma_fe", r.gamma_fe, qutrit_op(s, QutritOp::sigma_fe_minus));
    add("gamma_fg", r.gamma_fg, qutrit_op(s, QutritOp::sigma_fg_minus));
    add("gamma_phi_e", r.gamma_phi_e, qutrit_op(s, QutritOp::proj_e));
    add("gamma_phi_f", r.gamma_phi_f, qutrit_op(s, QutritOp::proj_f));
    return set;
  }
};

/// Dense reference right-hand side of the master equation. Slow; used by
/// tests as an independent check of the compiled kernel.
inline ComplexMatrix lindblad_rhs_dense(const ComplexMatrix& h,
                                        const ComplexMatrix& rho,
                                        const ChannelSet& channels) {
  ComplexMatrix out = -kI * commutator(h, rho);
  for (const auto& c : channels.channels) {
    const ComplexMatrix ldl = c.op.adjoint() * c.op;
    out += c.rate * (c.op * rho * c.op.adjoint() - 0.5 * ldl * rho -
                     0.5 * rho * ldl);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory records

struct TrajectorySample {
  double t_ns = 0.0;
  double trace = 0.0;
  double purity = 0.0;
  double p_e = 0.0;
  double p_f = 0.0;
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  double top_fock_population = 0.0;
};

/// Diagnostics of rho in the qutrit (x) c1 (x) c2 basis.
inline TrajectorySample sample_density(const DensityMatrix& rho,
                                       const SpaceSpec& s, double t) {
  TrajectorySample out;
  out.t_ns = t;
  out.trace = rho.trace().real();
  out.purity = rho.squaredNorm();  // tr(rho^2) for Hermitian rho
  for (int i = 0; i < s.dim(); ++i) {
    const double p = rho(i, i).real();
    const BasisLabel b = decode_index(s, i);
    if (b.level == QutritLevel::e) out.p_e += p;
    if (b.level == QutritLevel::f) out.p_f += p;
    out.n1_mean += b.n1 * p;
    out.n2_mean += b.n2 * p;
    if (b.n1 == s.n1_trunc - 1 || b.n2 == s.n2_trunc - 1) {
      out.top_fock_population += p;
    }
  }
  return out;
}

inline TrajectorySample sample_state(const StateVector& psi, const SpaceSpec& s,
                                     double t) {
  TrajectorySample out;
  out.t_ns = t;
  out.trace = psi.squaredNorm();
  out.purity = out.trace * out.trace;
  for (int i = 0; i < s.dim(); ++i) {
    const double p = std::norm(psi(i));
    const BasisLabel b = decode_index(s, i);
    if (b.level == QutritLevel::e) out.p_e += p;
    if (b.level == QutritLevel::f) out.p_f += p;
    out.n1_mean += b.n1 * p;
    out.n2_mean += b.n2 * p;
    if (b.n1 == s.n1_trunc - 1 || b.n2 == s.n2_trunc - 1) {
      out.top_fock_population += p;
    }
  }
  return out;
}

inline void write_trajectory_csv(std::ostream& os,
                                 const std::vector<TrajectorySample>& samples) {
  os << "t_ns,trace,purity,p_e,p_f,n1_mean,n2_mean,top_fock_population\n";
  os.precision(17);
  for (const auto& s : samples) {
    os << s.t_ns << ',' << s.trace << ',' << s.purity << ',' << s.p_e << ','
       << s.p_f << ',' << s.n1_mean << ',' << s.n2_mean << ','
       << s.top_fock_population << '\n';
  }
}

// ---------------------------------------------------------------------------
// Compiled operators

namespace detail {

struct SparseEntry {
  int row = 0;
  int col = 0;
  Complex value;
};

inline std::vector<SparseEntry> nonzeros(const ComplexMatrix& m) {
  std::vector<SparseEntry> out;
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      if (m(r, c) != Complex(0.0, 0.0)) out.push_back({r, c, m(r, c)});
    }
  }
  return out;
}

// H(t) as a flat entry list. Entry e has value base_e * z_{term_e} or its
// conjugate, with z_k = exp(i w_k t).
class CompiledHamiltonian {
 public:
  CompiledHamiltonian() = default;

  explicit CompiledHamiltonian(const TimeDependentHamiltonian& h)
      : dim_(int(h.dim())) {
    for (const auto& term : h.terms()) {
      const int k = int(rates_.size());
      rates_.push_back(term.phase_rate);
      for (const auto& e : nonzeros(term.op)) {
        rows_.push_back(e.row);
        cols_.push_back(e.col);
        base_.push_back(e.value);
        term_.push_back(k);
        conj_.push_back(0);
        if (term.includes_hc) {
          rows_.push_back(e.col);
          cols_.push_back(e.row);
          base_.push_back(e.value);
          term_.push_back(k);
          conj_.push_back(1);
        }
      }
    }
    values_.resize(base_.size());
    phases_.resize(rates_.size());
  }

  /// Append a static block (not Hermitian in general).
  void add_static(const ComplexMatrix& m) {
    const int k = int(rates_.size());
    rates_.push_back(0.0);
    phases_.resize(rates_.size());
    for (const auto& e : nonzeros(m)) {
      rows_.push_back(e.row);
      cols_.push_back(e.col);
      base_.push_back(e.value);
      term_.push_back(k);
      conj_.push_back(0);
    }
    values_.resize(base_.size());
  }

  void evaluate(double t) {
    for (std::size_t k = 0; k < rates_.size(); ++k) {
      phases_[k] = rates_[k] == 0.0 ? Complex(1.0) : std::polar(1.0, rates_[k] * t);
    }
    for (std::size_t e = 0; e < base_.size(); ++e) {
      const Complex v = base_[e] * phases_[term_[e]];
      values_[e] = conj_[e] ? std::conj(v) : v;
    }
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return base_.size(); }
  [[nodiscard]] int row(std::size_t e) const { return rows_[e]; }
  [[nodiscard]] int col(std::size_t e) const { return cols_[e]; }
  [[nodiscard]] Complex value(std::size_t e) const { return values_[e]; }

 private:
  int dim_ = 0;
  std::vector<double> rates_;
  std::vector<Complex> phases_;
  std::vector<int> rows_, cols_, term_;
  std::vector<char> conj_;
  std::vector<Complex> base_, values_;
};

// A collapse operator L scaled by sqrt(rate), stored as maximal runs of
// entries whose rows and columns both advance by one. Ladder operators and
// qutrit projectors in this basis decompose into a handful of long runs.
struct CompiledJump {
  struct Run {
    int row0 = 0;
    int col0 = 0;
    int length = 0;
    int offset = 0;  // into weights
  };
  std::vector<SparseEntry> entries;
  std::vector<Run> runs;
  std::vector<double> weights_re, weights_im;
  bool real = true;

  explicit CompiledJump(std::vector<SparseEntry> e) : entries(std::move(e)) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& en = entries[i];
      if (en.value.imag() != 0.0) real = false;
      const bool extends = !runs.empty() &&
                           en.row == runs.back().row0 + runs.back().length &&
                           en.col == runs.back().col0 + runs.back().length;
      if (extends) {
        ++runs.back().length;
      } else {
        runs.push_back({en.row, en.col, 1, int(weights_re.size())});
      }
      weights_re.push_back(en.value.real());
      weights_im.push_back(en.value.imag());
    }
  }
};

// Master-equation right-hand side on split storage rho = R + i I
// (R symmetric, I antisymmetric for Hermitian rho).
class LindbladKernel {
 public:
  using RealMatrix = Eigen::MatrixXd;

  LindbladKernel(const TimeDependentHamiltonian& h, const ChannelSet& channels)
      : dim_(int(h.dim())) {
    CompiledHamiltonian compiled(h);
    ComplexMatrix decay = ComplexMatrix::Zero(dim_, dim_);
    for (const auto& c : channels.channels) {
      if (c.op.rows() != dim_ || c.op.cols() != dim_) {
        throw std::invalid_argument("channel operator dimension mismatch");
      }
      decay += c.rate * c.op.adjoint() * c.op;
      auto entries = nonzeros(c.op);
      const double s = std::sqrt(c.rate);
      for (auto& e : entries) e.value *= s;
      jumps_.emplace_back(std::move(entries));
    }
    // B = rho H_eff^+ with H_eff^+ = H + (i/2) sum g L^+ L.
    compiled.add_static(0.5 * kI * decay);
    h_ = std::move(compiled);
    order_.resize(h_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) {
      return h_.col(a) < h_.col(b);
    });
    br_.resize(dim_, dim_);
    bi_.resize(dim_, dim_);
  }

  [[nodiscard]] int dim() const { return dim_; }

  /// (out_re, out_im) = d rho / dt at time t for Hermitian rho = re + i im.
  void operator()(double t, const RealMatrix& re, const RealMatrix& im,
                  RealMatrix& out_re, RealMatrix& out_im) {
    h_.evaluate(t);
    const int d = dim_;
    std::size_t e = 0;
    for (int c = 0; c < d; ++c) {
      double* __restrict dr = br_.data() + std::size_t(c) * d;
      double* __restrict di = bi_.data() + std::size_t(c) * d;
      std::fill(dr, dr + d, 0.0);
      std::fill(di, di + d, 0.0);
      for (; e < order_.size() && h_.col(order_[e]) == c; ++e) {
        const std::size_t idx = order_[e];
        const double vr = h_.value(idx).real(), vi = h_.value(idx).imag();
        const double* __restrict sr = re.data() + std::size_t(h_.row(idx)) * d;
        const double* __restrict si = im.data() + std::size_t(h_.row(idx)) * d;
        for (int x = 0; x < d; ++x) {
          dr[x] += vr * sr[x] - vi * si[x];
          di[x] += vr * si[x] + vi * sr[x];
        }
      }
    }
    // i (B - B^+) = -(Bi + Bi^T) + i (Br - Br^T)
    constexpr int kBlock = 64;
    for (int jb = 0; jb < d; jb += kBlock) {
      const int je = std::min(d, jb + kBlock);
      for (int ib = 0; ib < d; ib += kBlock) {
        const int ie = std::min(d, ib + kBlock);
        for (int j = jb; j < je; ++j) {
          for (int i = ib; i < ie; ++i) {
            out_re(i, j) = -(bi_(i, j) + bi_(j, i));
            out_im(i, j) = br_(i, j) - br_(j, i);
          }
        }
      }
    }
    for (const auto& jump : jumps_) add_jump(jump, re, im, out_re, out_im);
  }

 private:
  // out(r_k, r_l) += w_k conj(w_l) rho(c_k, c_l), one destination column at
  // a time, vectorized along each run.
  void add_jump(const CompiledJump& jump, const RealMatrix& re,
                const RealMatrix& im, RealMatrix& out_re,
                RealMatrix& out_im) const {
    const int d = dim_;
    for (std::size_t l = 0; l < jump.entries.size(); ++l) {
      const auto& el = jump.entries[l];
      const double lr = el.value.real(), li = -el.value.imag();  // conj(w_l)
      const double* sr = re.data() + std::size_t(el.col) * d;
      const double* si = im.data() + std::size_t(el.col) * d;
      double* dr = out_re.data() + std::size_t(el.row) * d;
      double* di = out_im.data() + std::size_t(el.row) * d;
      for (const auto& run : jump.runs) {
        const double* wr = jump.weights_re.data() + run.offset;
        const double* wi = jump.weights_im.data() + run.offset;
        const double* a = sr + run.col0;
        const double* b = si + run.col0;
        double* x = dr + run.row0;
        double* y = di + run.row0;
        if (jump.real) {
          for (int k = 0; k < run.length; ++k) {
            const double p = wr[k] * lr;
            x[k] += p * a[k];
            y[k] += p * b[k];
          }
        } else {
          for (int k = 0; k < run.length; ++k) {
            const double pr = wr[k] * lr - wi[k] * li;
            const double pi = wr[k] * li + wi[k] * lr;
            x[k] += pr * a[k] - pi * b[k];
            y[k] += pr * b[k] + pi * a[k];
          }
        }
      }
    }
  }

  int dim_ = 0;
  CompiledHamiltonian h_;
  std::vector<std::size_t> order_;
  std::vector<CompiledJump> jumps_;
  RealMatrix br_, bi_;
};

class SchroedingerKernel {
 public:
  explicit SchroedingerKernel(const TimeDependentHamiltonian& h)
      : h_(h), dim_(int(h.dim())) {}

  void operator()(double t, const ComplexVector& psi, ComplexVector& out) {
    h_.evaluate(t);
    out.setZero();
    for (std::size_t e = 0; e < h_.size(); ++e) {
      out(h_.row(e)) += h_.value(e) * psi(h_.col(e));
    }
    out *= -kI;
  }

 private:
  CompiledHamiltonian h_;
  int dim_ = 0;
};

// R <- (R + R^T)/2, I <- (I - I^T)/2, i.e. rho <- (rho + rho^+)/2.
inline void symmetrize(Eigen::MatrixXd& re, Eigen::MatrixXd& im) {
  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index d = re.rows();
  for (Eigen::Index jb = 0; jb < d; jb += kBlock) {
    const Eigen::Index je = std::min(d, jb + kBlock);
    for (Eigen::Index ib = 0; ib <= jb; ib += kBlock) {
      const Eigen::Index ie = std::min(d, ib + kBlock);
      for (Eigen::Index j = jb; j < je; ++j) {
        for (Eigen::Index i = ib; i < std::min(ie, j); ++i) {
          const double r = 0.5 * (re(i, j) + re(j, i));
          const double m = 0.5 * (im(i, j) - im(j, i));
          re(i, j) = r;
          re(j, i) = r;
          im(i, j) = m;
          im(j, i) = -m;
        }
      }
    }
  }
  im.diagonal().setZero();
}

inline bool record_now(long step, long steps, int stride) {
  return step == steps || (stride > 0 && step % stride == 0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Schroedinger propagation

struct UnitaryTrajectory {
  std::vector<double> times;
  std::vector<StateVector> states;  // recorded states (always initial + final)
  StateVector final_state;
  double norm_drift = 0.0;  // | |psi(t_final)| - |psi0| |
};

inline UnitaryTrajectory evolve_unitary(const TimeDependentHamiltonian& h,
                                        const StateVector& psi0,
                                        const PropagationConfig& cfg) {
  if (psi0.size() != h.dim()) {
    throw std::invalid_argument("evolve_unitary: state dimension mismatch");
  }
  const double norm0 = psi0.norm();
  if (std::abs(norm0 - 1.0) > 1e-8) {
    throw std::invalid_argument("evolve_unitary: initial state not normalized");
  }
  cfg.validate(h.max_phase_rate());
  detail::SchroedingerKernel f(h);
  const long steps = cfg.steps();
  const double dt = steps > 0 ? cfg.t_final / double(steps) : 0.0;

  UnitaryTrajectory out;
  StateVector psi = psi0, k1(psi0.size()), k2(psi0.size()), k3(psi0.size()),
              k4(psi0.size()), tmp(psi0.size());
  out.times.push_back(0.0);
  out.states.push_back(psi);
  for (long n = 1; n <= steps; ++n) {
    const double t = (n - 1) * dt;
    f(t, psi, k1);
    tmp = psi + 0.5 * dt * k1;
    f(t + 0.5 * dt, tmp, k2);
    tmp = psi + 0.5 * dt * k2;
    f(t + 0.5 * dt, tmp, k3);
    tmp = psi + dt * k3;
    f(t + dt, tmp, k4);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (cfg.renormalize) psi /= psi.norm();
    if (cfg.record_stride > 0 && n % cfg.record_stride == 0 && n != steps) {
      out.times.push_back(n * dt);
      out.states.push_back(psi);
    }
  }
  if (steps > 0) {
    out.times.push_back(cfg.t_final);
    out.states.push_back(psi);
  }
  out.norm_drift = std::abs(psi.norm() - norm0);
  out.final_state = std::move(psi);
  return out;
}

// ---------------------------------------------------------------------------
// Master-equation propagation

struct LindbladTrajectory {
  std::vector<TrajectorySample> samples;
  std::vector<double> times;            // times of stored states
  std::vector<DensityMatrix> states;    // only with cfg.store_states
  DensityMatrix final_state;
  double trace_drift = 0.0;       // max |tr rho(t) - tr rho0| over recorded points
  double min_eigenvalue = 0.0;    // smallest value seen at positivity checks
  double max_top_fock = 0.0;      // largest top-Fock population at recorded points
  double hermiticity_error = 0.0;  // of the final state
};

namespace detail {

// Basis states reachable from the support of rho0 under the Hamiltonian,
// the jump operators and their L^+ L terms. The master equation never
// leaves this set, so propagating the restricted problem is exact.
inline std::vector<int> invariant_support(const TimeDependentHamiltonian& h,
                                          const ChannelSet& channels,
                                          const ComplexMatrix& rho0) {
  const int d = int(h.dim());
  std::vector<std::vector<int>> adj(std::size_t(d), std::vector<int>{});
  auto link = [&](const ComplexMatrix& m, bool both) {
    for (const auto& e : nonzeros(m)) {
      adj[std::size_t(e.col)].push_back(e.row);
      if (both) adj[std::size_t(e.row)].push_back(e.col);
    }
  };
  for (const auto& term : h.terms()) link(term.op, true);
  for (const auto& c : channels.channels) {
    link(c.op, false);
    link(c.op.adjoint() * c.op, true);
  }
  std::vector<char> seen(std::size_t(d), 0);
  std::vector<int> stack;
  for (int i = 0; i < d; ++i) {
    if (rho0.row(i).cwiseAbs().maxCoeff() > 0.0) {
      seen[std::size_t(i)] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : adj[std::size_t(i)]) {
      if (!seen[std::size_t(j)]) {
        seen[std::size_t(j)] = 1;
        stack.push_back(j);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < d; ++i) {
    if (seen[std::size_t(i)]) out.push_back(i);
  }
  return out;
}

inline ComplexMatrix restrict_to(const ComplexMatrix& m, const std::vector<int>& idx) {
  const Eigen::Index n = Eigen::Index(idx.size());
  ComplexMatrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

inline ComplexMatrix expand_from(const ComplexMatrix& m, const std::vector<int>& idx,
                                 Eigen::Index dim) {
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out(idx[i], idx[j]) = m(Eigen::Index(i), Eigen::Index(j));
    }
  }
  return out;
}

inline TimeDependentHamiltonian restrict_to(const TimeDependentHamiltonian& h,
                                            const std::vector<int>& idx) {
  TimeDependentHamiltonian out(Eigen::Index(idx.size()));
  for (const auto& term : h.terms()) {
    out.add({restrict_to(term.op, idx), term.phase_rate, term.includes_hc});
  }
  return out;
}

inline ChannelSet restrict_to(const ChannelSet& channels, const std::vector<int>& idx) {
  ChannelSet out;
  for (const auto& c : channels.channels) {
    out.channels.push_back({c.name, restrict_to(c.op, idx), c.rate});
  }
  return out;
}

// Propagates any Hermitian matrix (positivity is not required, so linear
// combinations of density matrices can be evolved). When check_positivity
// is set, aborts with NumericalError as soon as rho loses positivity.
inline LindbladTrajectory propagate_hermitian(const TimeDependentHamiltonian& h,
                                              const ComplexMatrix& rho0,
                                              const ChannelSet& channels,
                                              const PropagationConfig& cfg,
                                              const SpaceSpec* space,
                                              bool check_positivity) {
  if (rho0.rows() != h.dim() || rho0.cols() != h.dim()) {
    throw std::invalid_argument("evolve_lindblad: density matrix dimension mismatch");
  }
  cfg.validate(h.max_phase_rate());
  const Eigen::Index full_dim = rho0.rows();
  const std::vector<int> support = invariant_support(h, channels, rho0);
  const bool compressed = Eigen::Index(support.size()) < full_dim;
  LindbladKernel f = compressed
      ? LindbladKernel(restrict_to(h, support), restrict_to(channels, support))
      : LindbladKernel(h, channels);
  const long steps = cfg.steps();
  const double dt = steps > 0 ? cfg.t_final / double(steps) : 0.0;
  const Eigen::Index d = f.dim();
  const double trace0 = rho0.trace().real();

  using RealMatrix = Eigen::MatrixXd;
  RealMatrix re, im;
  if (compressed) {
    const ComplexMatrix sub = restrict_to(rho0, support);
    re = sub.real();
    im = sub.imag();
  } else {
    re = rho0.real();
    im = rho0.imag();
  }
  symmetrize(re, im);
  RealMatrix kr(d, d), ki(d, d), tr(d, d), ti(d, d), ar(d, d), ai(d, d);
  auto reduced_rho = [&] {
    ComplexMatrix rho(d, d);
    rho.real() = re;
    rho.imag() = im;
    return rho;
  };
  auto complex_rho = [&] {
    return compressed ? expand_from(reduced_rho(), support, full_dim) : reduced_rho();
  };

  LindbladTrajectory out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  auto check = [&](double t) {
    // The discarded block is identically zero and contributes eigenvalue 0.
    double lam = min_eigenvalue_hermitian(reduced_rho());
    if (compressed) lam = std::min(lam, 0.0);
    out.min_eigenvalue = std::min(out.min_eigenvalue, lam);
    if (lam < kPositivityTolerance) {
      std::ostringstream msg;
      msg << "positivity breach at t = " << t << " ns: min eigenvalue " << lam;
      throw NumericalError(msg.str());
    }
  };
  auto record = [&](double t) {
    const double tr_now = re.trace();
    out.trace_drift = std::max(out.trace_drift, std::abs(tr_now - trace0));
    if (space != nullptr || cfg.store_states) {
      ComplexMatrix rho = complex_rho();
      if (space != nullptr) {
        TrajectorySample s = sample_density(rho, *space, t);
        out.max_top_fock = std::max(out.max_top_fock, s.top_fock_population);
        out.samples.push_back(s);
      }
      if (cfg.store_states) {
        out.times.push_back(t);
        out.states.push_back(std::move(rho));
      }
    }
  };

  if (check_positivity) check(0.0);
  record(0.0);
  // Classical RK4, accumulating the update in (ar, ai).
  for (long n = 1; n <= steps; ++n) {
    const double t = (n - 1) * dt;
    f(t, re, im, kr, ki);
    ar = re + (dt / 6.0) * kr;
    ai = im + (dt / 6.0) * ki;
    tr = re + (0.5 * dt) * kr;
    ti = im + (0.5 * dt) * ki;
    f(t + 0.5 * dt, tr, ti, kr, ki);
    ar += (dt / 3.0) * kr;
    ai += (dt / 3.0) * ki;
    tr = re + (0.5 * dt) * kr;
    ti = im + (0.5 * dt) * ki;
    f(t + 0.5 * dt, tr, ti, kr, ki);
    ar += (dt / 3.0) * kr;
    ai += (dt / 3.0) * ki;
    tr = re + dt * kr;
    ti = im + dt * ki;
    f(t + dt, tr, ti, kr, ki);
    re = ar + (dt / 6.0) * kr;
    im = ai + (dt / 6.0) * ki;
    symmetrize(re, im);
    if (cfg.renormalize) {
      const double s = trace0 / re.trace();
      re *= s;
      im *= s;
    }
    const double tn = n == steps ? cfg.t_final : n * dt;
    if (check_positivity &&
        (n % cfg.positivity_check_stride == 0 || n == steps)) {
      check(tn);
    }
    if (record_now(n, steps, cfg.record_stride)) record(tn);
  }
  if (!check_positivity) out.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  out.final_state = complex_rho();
  out.hermiticity_error = hermiticity_error(out.final_state);
  return out;
}

}  // namespace detail

/// RK4 on drho/dt = -i[H(t), rho] + sum_k g_k D[L_k] rho with Hermitian
/// symmetrization after every step and positivity checks every
/// cfg.positivity_check_stride steps (and at the end).
inline LindbladTrajectory evolve_lindblad(const TimeDependentHamiltonian& h,
                                          const DensityMatrix& rho0,
                                          const ChannelSet& channels,
                                          const PropagationConfig& cfg,
                                          const std::optional<SpaceSpec>& space = {}) {
  if (!is_hermitian(rho0, 1e-10)) {
    throw std::invalid_argument("evolve_lindblad: rho0 is not Hermitian");
  }
  if (std::abs(rho0.trace().real() - 1.0) > 1e-8) {
    throw std::invalid_argument("evolve_lindblad: rho0 trace is not 1");
  }
  return detail::propagate_hermitian(h, rho0, channels, cfg,
                                     space ? &*space : nullptr, true);
}

}  // namespace catgate
