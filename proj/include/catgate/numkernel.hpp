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

// Dense complex linear algebra shared by every other header. Storage is
// Eigen's column-major MatrixXcd; the helpers below pin down the handful of
// operations the simulator relies on and their error behaviour.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace catgate {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Thrown when a propagation or a physical consistency check breaks down
/// (positivity loss, step-size violation). Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ")");
  }
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                               const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

/// kron(a, b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline ComplexMatrix identity(Eigen::Index n) {
  return ComplexMatrix::Identity(n, n);
}

inline ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

inline Complex trace(const ComplexMatrix& a) {
  require_square(a, "trace");
  return a.trace();
}

inline double frobenius_distance(const ComplexMatrix& a,
                                 const ComplexMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  return (a - b).norm();
}

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// max|A - A^dagger|, the absolute Hermiticity defect.
inline double hermiticity_error(const ComplexMatrix& a) {
  require_square(a, "hermiticity_error");
  return max_abs(a - a.adjoint());
}

/// Relative test: max|A - A^dagger| <= tol * max|A|.
inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_error(a) <= tol * std::max(max_abs(a), 1e-300);
}

/// exp(scale * a) by Padé scaling-and-squaring.
inline ComplexMatrix matexp(const ComplexMatrix& a, Complex scale = 1.0) {
  require_square(a, "matexp");
  if (a.rows() == 0) return a;
  const ComplexMatrix scaled = scale * a;
  return scaled.exp();
}

/// Smallest eigenvalue of the Hermitian part (A + A^dagger) / 2.
inline double min_eigenvalue_hermitian(const ComplexMatrix& a) {
  require_square(a, "min_eigenvalue_hermitian");
  if (a.rows() == 0) {
    throw std::invalid_argument("min_eigenvalue_hermitian: empty matrix");
  }
  const ComplexMatrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm,
                                                      Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("min_eigenvalue_hermitian: eigensolver failed");
  }
  return solver.eigenvalues().minCoeff();
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

}  // namespace catgate
