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
#include <string_view>
#include <vector>

#include "sdstab/jet.hpp"

namespace sdstab {

/// Immutable scalar expression over state coordinates, built from constants,
/// coordinates, + - * /, sin, cos, exp and integer powers.
///
/// Copies share the underlying tree. Evaluation is pure, so one expression may
/// be evaluated from several threads at once.
class Expr {
 public:
  enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kSin, kCos, kExp, kPow };

  Expr() : Expr(constant(0.0)) {}
  static Expr constant(double value);
  static Expr variable(int index);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr exp(const Expr& a);
  friend Expr pow(const Expr& a, int exponent);

  double eval(std::span<const double> x) const;
  double eval(const Eigen::VectorXd& x) const { return eval(std::span(x.data(), x.size())); }
  /// Taylor-mode evaluation; every entry of `x` must share one jet space.
  Jet eval(std::span<const Jet> x) const;

  Op op() const;
  /// Highest coordinate index referenced, or -1 for a constant expression.
  int max_variable() const;
  bool is_constant() const { return max_variable() < 0; }
  /// Infix rendering using `names` for coordinates (x1, x2, ... when empty).
  std::string str(std::span<const std::string> names = {}) const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// One clause of a region predicate: `margin(x) rel 0`.
struct Constraint {
  enum class Rel { kGreater, kGreaterEq, kNotEqual, kEqual };
  Expr margin;
  Rel rel = Rel::kGreater;

  /// Signed satisfaction margin: positive when satisfied with room to spare.
  /// For kNotEqual this is |margin|, for kEqual it is -|margin|.
  double slack(const Eigen::VectorXd& x) const;
  bool holds(const Eigen::VectorXd& x) const;
};

/// Conjunction of constraints, e.g. parsed from "x1 > 0 && x1^2 + x2^2 < 4".
struct Predicate {
  std::vector<Constraint> clauses;
  bool holds(const Eigen::VectorXd& x) const;
};

/// Default coordinate names x1..xn.
std::vector<std::string> default_variable_names(int n);

/// Parses an infix expression. Grammar (whitespace-insensitive):
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] integer)?
///   primary := number | name | func '(' expr ')' | 'pow' '(' expr ',' ['-'] integer ')' | '(' expr ')'
///   func    := 'sin' | 'cos' | 'exp'
///
/// `names` lists the coordinate names in index order.
Expr parse_expression(std::string_view text, std::span<const std::string> names);

/// Parses `rel ('&&' rel)*` where rel is `expr op expr` and op is one of
/// > < >= <= != ==.
Predicate parse_predicate(std::string_view text, std::span<const std::string> names);

}  // namespace sdstab
