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

#include "sdstab/fields.hpp"

#include <algorithm>
#include <sstream>

#include "sdstab/errors.hpp"

namespace sdstab {

namespace {

// Highest jet order the lowest-level leaf of a nested field may be asked for.
constexpr int kMaxInternalOrder = kMaxJetOrder + 2;

void check_order(int order, int depth) {
  if (order < 0 || order > kMaxJetOrder) {
    throw InvalidArgument("jet order must lie in [0, " + std::to_string(kMaxJetOrder) + "]");
  }
  if (order + depth > kMaxInternalOrder) {
    throw InvalidArgument("field nesting too deep for the requested jet order");
  }
}

void check_point(const Eigen::VectorXd& x, int vars) {
  if (x.size() != vars) {
    throw InvalidArgument("point has dimension " + std::to_string(x.size()) + ", field expects " +
                          std::to_string(vars));
  }
}

}  // namespace

struct VectorField::Node {
  int vars = 0;
  int depth = 0;
  std::vector<Expr> components;  // leaf when non-empty
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  std::vector<Jet> jets(const Eigen::VectorXd& x, int order) const {
    if (!components.empty()) {
      const auto coords = coordinate_jets(x, order);
      std::vector<Jet> out;
      out.reserve(components.size());
      for (const auto& c : components) out.push_back(c.eval(coords));
      return out;
    }
    const auto xj = lhs->jets(x, order + 1);
    const auto yj = rhs->jets(x, order + 1);
    const int n = vars;
    std::vector<Jet> out;
    out.reserve(n);
    std::vector<Jet> xt, yt;
    for (int j = 0; j < n; ++j) {
      xt.push_back(xj[j].truncated(order));
      yt.push_back(yj[j].truncated(order));
    }
    for (int k = 0; k < n; ++k) {
      Jet acc(JetSpace::get(n, order));
      for (int j = 0; j < n; ++j) {
        acc += yj[k].derivative(j) * xt[j];
        acc -= xj[k].derivative(j) * yt[j];
      }
      out.push_back(std::move(acc));
    }
    return out;
  }

  void describe(std::span<const std::string> names, std::ostream& os) const {
    if (!components.empty()) {
      os << '(';
      for (std::size_t i = 0; i < components.size(); ++i) {
        if (i) os << ", ";
        os << components[i].str(names);
      }
      os << ')';
      return;
    }
    os << '[';
    lhs->describe(names, os);
    os << ", ";
    rhs->describe(names, os);
    os << ']';
  }
};

VectorField::VectorField(std::vector<Expr> components, int vars) {
  if (vars < 1) throw InvalidArgument("vector field needs at least one coordinate");
  if (components.empty()) throw InvalidArgument("vector field needs at least one component");
  for (const auto& c : components) {
    if (c.max_variable() >= vars) {
      throw InvalidArgument("component references a coordinate beyond the field's dimension");
    }
  }
  auto n = std::make_shared<Node>();
  n->vars = vars;
  n->components = std::move(components);
  node_ = std::move(n);
}

VectorField::VectorField(std::vector<Expr> components)
    : VectorField(components, static_cast<int>(components.size())) {}

VectorField VectorField::bracket(const VectorField& x, const VectorField& y) {
  if (!x.square() || !y.square() || x.vars() != y.vars()) {
    throw InvalidArgument("Lie bracket needs two square fields of equal dimension");
  }
  auto n = std::make_shared<Node>();
  n->vars = x.vars();
  n->depth = 1 + std::max(x.depth(), y.depth());
  n->lhs = x.node_;
  n->rhs = y.node_;
  return VectorField(std::move(n));
}

int VectorField::vars() const { return node_->vars; }

int VectorField::components() const {
  return node_->components.empty() ? node_->vars : static_cast<int>(node_->components.size());
}

int VectorField::depth() const { return node_->depth; }

Eigen::VectorXd VectorField::operator()(const Eigen::VectorXd& x) const {
  check_point(x, vars());
  Eigen::VectorXd out(components());
  if (!node_->components.empty()) {
    for (int i = 0; i < out.size(); ++i) out[i] = node_->components[i].eval(x);
    return out;
  }
  const auto j = node_->jets(x, 0);
  for (int i = 0; i < out.size(); ++i) out[i] = j[i].value();
  return out;
}

std::vector<Jet> VectorField::jets(const Eigen::VectorXd& x, int order) const {
  check_point(x, vars());
  check_order(order, depth());
  return node_->jets(x, order);
}

Eigen::MatrixXd VectorField::jacobian(const Eigen::VectorXd& x) const {
  const auto j = jets(x, 1);
  Eigen::MatrixXd out(components(), vars());
  for (int i = 0; i < components(); ++i) out.row(i) = j[i].gradient().transpose();
  return out;
}

std::string VectorField::describe(std::span<const std::string> names) const {
  std::ostringstream os;
  node_->describe(names, os);
  return os.str();
}

struct ScalarField::Node {
  enum class Kind { kLeaf, kLie, kProduct, kSum };
  Kind kind = Kind::kLeaf;
  int vars = 0;
  int depth = 0;
  Expr expr;
  std::shared_ptr<const VectorField::Node> field;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  Jet jet(const Eigen::VectorXd& x, int order) const {
    switch (kind) {
      case Kind::kLeaf:
        return expr.eval(coordinate_jets(x, order));
      case Kind::kLie: {
        const Jet vj = lhs->jet(x, order + 1);
        const auto fj = field->jets(x, order + 1);
        Jet acc(JetSpace::get(vars, order));
        for (int j = 0; j < vars; ++j) acc += vj.derivative(j) * fj[j].truncated(order);
        return acc;
      }
      case Kind::kProduct:
        return lhs->jet(x, order) * rhs->jet(x, order);
      case Kind::kSum:
        return lhs->jet(x, order) + rhs->jet(x, order);
    }
    throw InvalidArgument("corrupt scalar field node");
  }

  void describe(std::span<const std::string> names, std::ostream& os) const {
    switch (kind) {
      case Kind::kLeaf:
        os << expr.str(names);
        return;
      case Kind::kLie:
        os << "L_";
        field->describe(names, os);
        os << '(';
        lhs->describe(names, os);
        os << ')';
        return;
      case Kind::kProduct:
      case Kind::kSum:
        os << '(';
        lhs->describe(names, os);
        os << (kind == Kind::kProduct ? ")*(" : ") + (");
        rhs->describe(names, os);
        os << ')';
        return;
    }
  }
};

ScalarField::ScalarField(Expr expr, int vars) {
  if (vars < 1) throw InvalidArgument("scalar field needs at least one coordinate");
  if (expr.max_variable() >= vars) {
    throw InvalidArgument("expression references a coordinate beyond the field's dimension");
  }
  auto n = std::make_shared<Node>();
  n->vars = vars;
  n->expr = std::move(expr);
  node_ = std::move(n);
}

ScalarField ScalarField::lie_derivative(const VectorField& x, const ScalarField& v) {
  if (x.vars() != v.vars() || x.components() != v.vars()) {
    throw InvalidArgument("Lie derivative needs a square field matching the function's dimension");
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kLie;
  n->vars = v.vars();
  n->depth = 1 + std::max(v.depth(), x.depth());
  n->field = x.node_;
  n->lhs = v.node_;
  return ScalarField(std::move(n));
}

ScalarField ScalarField::product(const ScalarField& a, const ScalarField& b) {
  if (a.vars() != b.vars()) throw InvalidArgument("product of scalar fields of different dimension");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kProduct;
  n->vars = a.vars();
  n->depth = std::max(a.depth(), b.depth());
  n->lhs = a.node_;
  n->rhs = b.node_;
  return ScalarField(std::move(n));
}

ScalarField ScalarField::sum(const ScalarField& a, const ScalarField& b) {
  if (a.vars() != b.vars()) throw InvalidArgument("sum of scalar fields of different dimension");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::kSum;
  n->vars = a.vars();
  n->depth = std::max(a.depth(), b.depth());
  n->lhs = a.node_;
  n->rhs = b.node_;
  return ScalarField(std::move(n));
}

int ScalarField::vars() const { return node_->vars; }
int ScalarField::depth() const { return node_->depth; }

double ScalarField::operator()(const Eigen::VectorXd& x) const {
  check_point(x, vars());
  if (node_->kind == Node::Kind::kLeaf) return node_->expr.eval(x);
  return node_->jet(x, 0).value();
}

Jet ScalarField::jet(const Eigen::VectorXd& x, int order) const {
  check_point(x, vars());
  check_order(order, depth());
  return node_->jet(x, order);
}

Eigen::VectorXd ScalarField::gradient(const Eigen::VectorXd& x) const { return jet(x, 1).gradient(); }

std::string ScalarField::describe(std::span<const std::string> names) const {
  std::ostringstream os;
  node_->describe(names, os);
  return os.str();
}

VectorField parse_vector_field(std::span<const std::string> components,
                               std::span<const std::string> names) {
  std::vector<Expr> exprs;
  exprs.reserve(components.size());
  for (const auto& c : components) exprs.push_back(parse_expression(c, names));
  return VectorField(std::move(exprs), static_cast<int>(names.size()));
}

ScalarField parse_scalar_field(std::string_view text, std::span<const std::string> names) {
  return ScalarField(parse_expression(text, names), static_cast<int>(names.size()));
}

}  // namespace sdstab
