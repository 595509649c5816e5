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

#include "sdstab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "sdstab/errors.hpp"
#include "sdstab/sampling.hpp"

namespace sdstab {

namespace {

void require_square(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument(std::string(what) + " must be square and non-empty");
  if (!a.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular t and
// updates the unitary factor u so that u t u^* is unchanged.
void swap_schur_pair(Eigen::MatrixXcd& t, Eigen::MatrixXcd& u, Eigen::Index k) {
  const std::complex<double> a = t(k, k);
  const std::complex<double> b = t(k + 1, k + 1);
  // Eigenvector of the 2x2 block for eigenvalue b.
  Eigen::Vector2cd v(t(k, k + 1), b - a);
  const double len = v.norm();
  if (len == 0.0) return;
  v /= len;
  Eigen::Matrix2cd z;
  z.col(0) = v;
  z.col(1) << -std::conj(v(1)), std::conj(v(0));

  t.middleCols(k, 2) = t.middleCols(k, 2) * z;
  t.middleRows(k, 2) = z.adjoint() * t.middleRows(k, 2);
  u.middleCols(k, 2) = u.middleCols(k, 2) * z;
  t(k + 1, k) = 0.0;
  t(k, k) = b;
  t(k + 1, k + 1) = a;
}

double matrix_scale(const Eigen::MatrixXd& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a) {
  require_square(a, "matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigenvalue iteration did not converge");
  return solver.eigenvalues();
}

double spectral_abscissa(const Eigen::MatrixXd& a) { return eigenvalues(a).real().maxCoeff(); }

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  require_square(a, "A");
  require_square(q, "Q");
  if (q.rows() != a.rows()) throw InvalidArgument("A and Q must have equal size");
  if (!((q - q.transpose()).norm() <= 1e-12 * (1.0 + q.norm()))) throw PreconditionViolation("Q must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(q, Eigen::EigenvaluesOnly);
    if (!(qs.eigenvalues().minCoeff() > 0.0)) throw PreconditionViolation("Q must be positive definite");
  }
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << "A is not Hurwitz (spectral abscissa " << abscissa << ")";
    throw PreconditionViolation(os.str());
  }

  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  // vec(A' P + P A) = (I (x) A' + A' (x) I) vec(P), column-major vec.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = eye(i, j) * at + at(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  if (!lu.isInvertible()) throw NumericalFailure("singular Kronecker system in Lyapunov solve");
  Eigen::VectorXd p = lu.solve(rhs);
  p += lu.solve(rhs - k * p);  // one step of iterative refinement

  Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
  out = 0.5 * (out + out.transpose()).eval();

  const double residual = (at * out + out * a + q).norm();
  if (!(residual <= 1e-8 * (1.0 + q.norm()))) {
    std::ostringstream os;
    os << "Lyapunov residual too large: " << residual;
    throw NumericalFailure(os.str());
  }
  return out;
}

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require_square(a, "A");
  if (b.rows() != a.rows() || b.cols() == 0 || !b.allFinite()) throw InvalidArgument("B must be n x m with m >= 1");
  const Eigen::Index n = a.rows();
  const double scale = std::max(matrix_scale(a), matrix_scale(b));

  // PBH test on the closed right half-plane modes of A.
  const Eigen::VectorXcd lambda = eigenvalues(a);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda[i].real() < -kImaginaryAxisTolerance * scale) continue;
    Eigen::MatrixXcd pbh(n, n + b.cols());
    pbh.leftCols(n) = a.cast<std::complex<double>>() - lambda[i] * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(b.cols()) = b.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const double smallest = svd.singularValues()(n - 1);
    if (smallest <= 1e-9 * scale) {
      std::ostringstream os;
      os << "pair (A, B) is not stabilizable: uncontrollable mode " << lambda[i].real()
         << (lambda[i].imag() >= 0 ? "+" : "") << lambda[i].imag() << "i";
      throw NotStabilizable(os.str(), Eigen::VectorXd());
    }
  }

  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -b * b.transpose();
  h.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  h.bottomRightCorner(n, n) = -a.transpose();

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(h.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw NumericalFailure("Schur decomposition of the Hamiltonian failed");
  Eigen::MatrixXcd t = schur.matrixT();
  Eigen::MatrixXcd u = schur.matrixU();

  const double hscale = matrix_scale(h);
  Eigen::Index stable = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = t(i, i).real();
    if (std::abs(re) <= kImaginaryAxisTolerance * hscale) {
      throw NotStabilizable("Hamiltonian has an eigenvalue on the imaginary axis", Eigen::VectorXd());
    }
    if (re < 0.0) {
      for (Eigen::Index k = i; k > stable; --k) swap_schur_pair(t, u, k - 1);
      ++stable;
    }
  }
  if (stable != n) throw NumericalFailure("Hamiltonian stable subspace has wrong dimension");

  const Eigen::MatrixXcd u1 = u.topLeftCorner(n, n);
  const Eigen::MatrixXcd u2 = u.bottomLeftCorner(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u1);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 1e-10 * sv(0))) {
    throw NotStabilizable("stable Hamiltonian subspace is not a graph (U1 singular)", Eigen::VectorXd());
  }
  const Eigen::MatrixXcd pc = u1.transpose().fullPivLu().solve(u2.transpose()).transpose();
  Eigen::MatrixXd p = pc.real();
  p = 0.5 * (p + p.transpose()).eval();
  return p;
}

GainSynthesisResult synthesize_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  GainSynthesisResult r;
  r.riccati = solve_care(a, b);
  r.gain = -b.transpose() * r.riccati;
  const Eigen::MatrixXd closed = a + b * r.gain;
  r.abscissa = spectral_abscissa(closed);
  if (!(r.abscissa < 0.0)) {
    throw NotStabilizable("Riccati gain failed to stabilize the pair", Eigen::VectorXd());
  }
  const Eigen::Index n = a.rows();
  r.lyapunov = solve_lyapunov(closed, Eigen::MatrixXd::Identity(n, n));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(r.lyapunov, Eigen::EigenvaluesOnly);
  if (!(ps.eigenvalues().minCoeff() > 0.0)) throw NumericalFailure("Lyapunov certificate is not positive definite");

  const Eigen::MatrixXd pa = r.lyapunov * closed;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ss(0.5 * (pa + pa.transpose()), Eigen::EigenvaluesOnly);
  r.decay = -ss.eigenvalues().maxCoeff();
  if (!(r.decay > 0.0)) throw NumericalFailure("decay constant is not positive");
  return r;
}

UniformBounds uniform_bounds(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& p_of_xi, int dim,
                             double radius, int samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (samples < 1) throw InvalidArgument("need at least one sample");
  auto points = ball_samples(dim, radius, samples, seed);
  points.insert(points.begin(), Eigen::VectorXd::Zero(dim));

  UniformBounds out;
  out.radius = radius;
  out.c_low = std::numeric_limits<double>::infinity();
  out.c_high = -std::numeric_limits<double>::infinity();
  for (const auto& xi : points) {
    Eigen::MatrixXd p;
    try {
      p = p_of_xi(xi);
    } catch (const NotStabilizable& e) {
      throw NotStabilizable(e.what(), xi);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p, Eigen::EigenvaluesOnly);
    out.c_low = std::min(out.c_low, es.eigenvalues().minCoeff());
    out.c_high = std::max(out.c_high, es.eigenvalues().maxCoeff());
  }
  return out;
}

}  // namespace sdstab
