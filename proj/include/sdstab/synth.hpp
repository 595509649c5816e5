/******************************************************************************
 * Copyright 2026 The sdstab Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <complex>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace sdstab {

/// Stabilizing state feedback u = F x for a frozen pair (A, B) together with
/// its quadratic certificate: P (A + B F) + (A + B F)' P = -I, and
/// x' P (A + B F) x <= -decay |x|^2.
struct GainSynthesisResult {
  Eigen::MatrixXd gain;      // F, m x n
  Eigen::MatrixXd lyapunov;  // P, n x n, symmetric positive definite
  Eigen::MatrixXd riccati;   // stabilizing CARE solution used to build F
  double decay = 0.0;        // k = -lambda_max(sym(P (A + B F)))
  double abscissa = 0.0;     // max Re lambda(A + B F) < 0
};

/// Envelope c_low I <= P(xi) <= c_high I over sampled xi in B[0, radius].
struct UniformBounds {
  double c_low = 0.0;
  double c_high = 0.0;
  double radius = 0.0;
};

/// Imaginary-axis tolerance used when classifying Hamiltonian eigenvalues.
inline constexpr double kImaginaryAxisTolerance = 1e-8;

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a);

/// Largest real part among the eigenvalues of a (Hessenberg-QR eigensolver).
/// A is Hurwitz iff the result is negative.
double spectral_abscissa(const Eigen::MatrixXd& a);

/// Solves A' P + P A = -Q by vectorization. A must be Hurwitz and Q
/// symmetric positive definite.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Stabilizing solution of A' P + P A - P B B' P + I = 0 from the stable
/// invariant subspace of the Hamiltonian [[A, -B B'], [-I, -A']], obtained by
/// an ordered complex Schur decomposition. Throws NotStabilizable when the
/// pair has an uncontrollable mode in the closed right half-plane.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// F = -B' P_care, then P from solve_lyapunov(A + B F, I) and the decay
/// constant read off the symmetric part of P (A + B F).
GainSynthesisResult synthesize_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Extreme eigenvalues of p_of_xi over the origin plus `samples` quasi-random
/// points of B[0, radius] in R^dim. A NotStabilizable failure at some xi is
/// rethrown with xi as the witness.
UniformBounds uniform_bounds(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& p_of_xi, int dim,
                             double radius, int samples, std::uint64_t seed = 0);

}  // namespace sdstab
