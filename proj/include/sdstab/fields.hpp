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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdstab/expression.hpp"
#include "sdstab/jet.hpp"

namespace sdstab {

/// Smooth map R^vars -> R^components. Either a list of component expressions
/// or a Lie bracket of two square fields; bracket values are computed from
/// jets of the operands, never from symbolic derivatives.
class VectorField {
 public:
  VectorField(std::vector<Expr> components, int vars);
  /// Square field: one component per coordinate.
  explicit VectorField(std::vector<Expr> components);

  /// [X, Y](x) = DY(x) X(x) - DX(x) Y(x).
  static VectorField bracket(const VectorField& x, const VectorField& y);

  int vars() const;
  int components() const;
  bool square() const { return vars() == components(); }
  /// Number of differentiation levels hidden inside the field.
  int depth() const;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  /// Component jets of the given order around x.
  std::vector<Jet> jets(const Eigen::VectorXd& x, int order) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  std::string describe(std::span<const std::string> names = {}) const;

  struct Node;

 private:
  friend class ScalarField;
  explicit VectorField(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Smooth scalar function on R^vars, closed under Lie differentiation along
/// a VectorField, products and sums.
class ScalarField {
 public:
  ScalarField(Expr expr, int vars);

  /// (X V)(x) = grad V(x) . X(x).
  static ScalarField lie_derivative(const VectorField& x, const ScalarField& v);
  static ScalarField product(const ScalarField& a, const ScalarField& b);
  static ScalarField sum(const ScalarField& a, const ScalarField& b);

  int vars() const;
  int depth() const;

  double operator()(const Eigen::VectorXd& x) const;
  Jet jet(const Eigen::VectorXd& x, int order) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  std::string describe(std::span<const std::string> names = {}) const;

  struct Node;

 private:
  explicit ScalarField(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Builds a field from infix component strings over `names`.
VectorField parse_vector_field(std::span<const std::string> components,
                               std::span<const std::string> names);
ScalarField parse_scalar_field(std::string_view text, std::span<const std::string> names);

}  // namespace sdstab
