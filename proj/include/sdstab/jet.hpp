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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sdstab {

/// Highest derivative order a jet may carry.
inline constexpr int kMaxJetOrder = 6;

/// Monomial layout for truncated multivariate Taylor polynomials in `vars`
/// variables up to total degree `order`.
///
/// Monomials are graded: all degree-0 terms, then degree 1, and so on, each
/// degree in lexicographic order of its exponent vector. The layout for order
/// d is therefore a prefix of the layout for order d + 1, which makes
/// truncation a resize.
class JetSpace {
 public:
  struct ProductTerm {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  /// Shared, cached instance. Thread-safe.
  static std::shared_ptr<const JetSpace> get(int vars, int order);

  int vars() const { return vars_; }
  int order() const { return order_; }
  std::size_t size() const { return exponents_.size(); }
  /// Number of monomials of total degree <= `degree`.
  std::size_t size_upto(int degree) const { return graded_end_[degree]; }

  std::span<const int> exponents(std::size_t index) const {
    return {exponents_[index].data(), exponents_[index].size()};
  }
  int degree(std::size_t index) const { return degrees_[index]; }
  /// Index of exponent + e_var, or -1 when that monomial exceeds the order.
  std::ptrdiff_t raise(std::size_t index, int var) const {
    return raise_[index * vars_ + var];
  }
  std::ptrdiff_t index_of(std::span<const int> exponent) const;

  /// Every (lhs, rhs) pair whose product stays within the truncation order.
  const std::vector<ProductTerm>& products() const { return products_; }

  JetSpace(int vars, int order);

 private:
  int vars_;
  int order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<std::size_t> graded_end_;
  std::vector<std::ptrdiff_t> raise_;
  std::vector<ProductTerm> products_;
};

/// Truncated Taylor expansion of a smooth function around a base point x0:
/// f(x0 + h) ~ sum_alpha c_alpha h^alpha, so d^alpha f(x0) = alpha! c_alpha.
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetSpace> space, double constant = 0.0);

  static Jet variable(std::shared_ptr<const JetSpace> space, int var, double base);

  const std::shared_ptr<const JetSpace>& space() const { return space_; }
  int order() const { return space_->order(); }
  double value() const { return coeffs_[0]; }
  double coeff(std::size_t index) const { return coeffs_[index]; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  /// Partial derivative with respect to `var`; the result has order one less.
  Jet derivative(int var) const;
  /// Drop every monomial of degree above `order`.
  Jet truncated(int order) const;
  /// k-th directional derivative d^k/dt^k f(x0 + t v) at t = 0.
  double directional(const Eigen::VectorXd& direction, int k) const;
  /// Partial derivative values at the base point, i.e. the gradient.
  Eigen::VectorXd gradient() const;
  double max_abs_coeff() const;

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator+=(double rhs) { coeffs_[0] += rhs; return *this; }
  Jet& operator*=(double rhs);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(const Jet& lhs, const Jet& rhs);
  friend Jet operator*(Jet lhs, double rhs) { return lhs *= rhs; }
  friend Jet operator*(double lhs, Jet rhs) { return rhs *= lhs; }
  friend Jet operator-(Jet v);

  friend Jet sin(const Jet& v);
  friend Jet cos(const Jet& v);
  friend Jet exp(const Jet& v);
  friend Jet reciprocal(const Jet& v);
  friend Jet powi(const Jet& v, int exponent);

 private:
  /// sum_k taylor[k] * (v - v0)^k, with taylor[k] = phi^(k)(v0) / k!.
  static Jet compose(const Jet& v, std::span<const double> taylor);

  std::shared_ptr<const JetSpace> space_;
  std::vector<double> coeffs_;
};

/// Jets of the coordinate functions around x0.
std::vector<Jet> coordinate_jets(const Eigen::VectorXd& x0, int order);

}  // namespace sdstab
