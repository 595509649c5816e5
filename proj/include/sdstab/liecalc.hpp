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

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sdstab/expression.hpp"
#include "sdstab/fields.hpp"
#include "sdstab/sysmodel.hpp"

namespace sdstab {

/// [X, Y] = DY X - DX Y.
VectorField lie_bracket(const VectorField& x, const VectorField& y);
/// (X V)(x) = grad V(x) . X(x).
ScalarField lie_derivative(const VectorField& x, const ScalarField& v);
/// X^j V, with X^0 V = V.
ScalarField iterated_lie_derivative(const VectorField& x, const ScalarField& v, int j);

/// Formal bracket expression in the two generators f (drift) and g (input).
class BracketTree {
 public:
  enum class Leaf { kF, kG };

  static BracketTree f() { return BracketTree(Leaf::kF); }
  static BracketTree g() { return BracketTree(Leaf::kG); }
  static BracketTree bracket(const BracketTree& lhs, const BracketTree& rhs);

  bool is_leaf() const { return !node_->lhs; }
  Leaf leaf() const { return node_->leaf; }
  const BracketTree left() const { return BracketTree(node_->lhs); }
  const BracketTree right() const { return BracketTree(node_->rhs); }

  /// "f", "g", "[f,g]", "[[f,g],g]", ...
  const std::string& str() const { return node_->text; }

  /// Realizes the tree as a vector field for concrete generators.
  VectorField realize(const VectorField& f, const VectorField& g) const;

 private:
  struct Node {
    Leaf leaf = Leaf::kF;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    int order = 1;
    std::string text;
  };
  explicit BracketTree(Leaf leaf);
  explicit BracketTree(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  friend int bracket_order(const BracketTree& t);
  std::shared_ptr<const Node> node_;
};

/// Number of generator leaves.
int bracket_order(const BracketTree& t);

/// Bracket monomials of order <= max_order, excluding the bare generator g.
/// [X, X] is dropped and of [X, Y], [Y, X] only the one with X < Y (by
/// rendering) is kept.
std::vector<BracketTree> bracket_monomials(int max_order);

/// Right-nested [..[[f, g], g].., g] with n brackets.
BracketTree ad_pattern_g(int n);
/// Right-nested [..[[g, f], f].., f] with n brackets.
BracketTree ad_pattern_f(int n);

enum class Clause {
  kInputNonzero,     // (gV)(x) != 0
  kDriftDecrease,    // (gV)(x) = 0 and (fV)(x) < 0
  kP1,
  kP2,
  kP3,
  kP4,
  kIntegratorDecrease,  // DV F < 0 on the first region
  kIntegratorBracket,   // DV F = 0 and DV dF/dy != 0 on the first region
  kIntegratorGradient,  // dW/dy != 0 on the second region
  kFail,
};

std::string_view clause_name(Clause c);

struct Witness {
  std::string label;
  double value = 0.0;
};

struct ConditionReport {
  Eigen::VectorXd point;
  Clause classification = Clause::kFail;
  /// Order N at which a higher-order clause was found; 0 for first-order clauses.
  int n_used = 0;
  /// Zero tolerance used for every sign test at this point.
  double tolerance = 0.0;
  std::vector<Witness> witnesses;

  bool passed() const { return classification != Clause::kFail; }
};

constexpr int kMaxConditionOrder = 4;
constexpr double kRelativeZeroTolerance = 1e-9;

/// Pointwise test of the algebraic stabilizability conditions for an affine
/// system x' = f(x) + u g(x) and a Lyapunov piece V at x != 0.
ConditionReport check_affine_point(const AffineSystem& sys, const ScalarField& v, const Eigen::VectorXd& x,
                                   int n_max = kMaxConditionOrder);

enum class IntegratorRegion { kFirst, kSecond };

/// Pointwise test of the feedback-integrator conditions for
/// x' = F(x, y), y' = u, with p = (x, y) in R^{n+1}. `big_f` maps R^{n+1} to
/// R^n, `v` lives on R^n and `w` on R^{n+1}.
ConditionReport check_integrator_point(const VectorField& big_f, const ScalarField& v, const ScalarField& w,
                                       IntegratorRegion region, const Eigen::VectorXd& p);

/// Throws InvalidArgument unless |V(0)| <= 1e-12 and V > 0 at quasi-random
/// nonzero points of B[0, radius] that satisfy `region` (all points when null).
void require_lyapunov_candidate(const ScalarField& v, const Predicate* region, double radius, int samples,
                                std::uint64_t seed = 0);

}  // namespace sdstab
