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

#include "sdstab/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sdstab/errors.hpp"

namespace sdstab {

struct Expr::Node {
  Op op;
  double value = 0.0;
  int index = 0;  // coordinate index for kVar, exponent for kPow
  int max_var = -1;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

double ipow(double v, int k) { return std::pow(v, k); }
Jet ipow(const Jet& v, int k) { return powi(v, k); }

template <class T, class MakeConst>
T eval_node(const Expr::Node& n, std::span<const T> x, const MakeConst& make) {
  using std::cos;
  using std::exp;
  using std::sin;
  switch (n.op) {
    case Expr::Op::kConst:
      return make(n.value);
    case Expr::Op::kVar:
      return x[n.index];
    case Expr::Op::kAdd:
      return eval_node(*n.lhs, x, make) + eval_node(*n.rhs, x, make);
    case Expr::Op::kSub:
      return eval_node(*n.lhs, x, make) - eval_node(*n.rhs, x, make);
    case Expr::Op::kMul:
      return eval_node(*n.lhs, x, make) * eval_node(*n.rhs, x, make);
    case Expr::Op::kDiv:
      return eval_node(*n.lhs, x, make) / eval_node(*n.rhs, x, make);
    case Expr::Op::kNeg:
      return -eval_node(*n.lhs, x, make);
    case Expr::Op::kSin:
      return sin(eval_node(*n.lhs, x, make));
    case Expr::Op::kCos:
      return cos(eval_node(*n.lhs, x, make));
    case Expr::Op::kExp:
      return exp(eval_node(*n.lhs, x, make));
    case Expr::Op::kPow:
      return ipow(eval_node(*n.lhs, x, make), n.index);
  }
  throw InvalidArgument("corrupt expression node");
}

NodePtr make_node(Expr::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  if (n->lhs) n->max_var = std::max(n->max_var, n->lhs->max_var);
  if (n->rhs) n->max_var = std::max(n->max_var, n->rhs->max_var);
  return n;
}

int precedence(Expr::Op op) {
  switch (op) {
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
      return 1;
    case Expr::Op::kMul:
    case Expr::Op::kDiv:
      return 2;
    case Expr::Op::kNeg:
      return 3;
    case Expr::Op::kPow:
      return 4;
    default:
      return 5;
  }
}

void render(const Expr::Node& n, std::span<const std::string> names, std::ostream& os) {
  auto child = [&](const Expr::Node& c, int min_prec) {
    const bool paren = precedence(c.op) < min_prec;
    if (paren) os << '(';
    render(c, names, os);
    if (paren) os << ')';
  };
  switch (n.op) {
    case Expr::Op::kConst: {
      std::ostringstream num;
      num.precision(17);
      num << n.value;
      if (n.value < 0) {
        os << '(' << num.str() << ')';
      } else {
        os << num.str();
      }
      return;
    }
    case Expr::Op::kVar:
      if (n.index < static_cast<int>(names.size())) {
        os << names[n.index];
      } else {
        os << 'x' << (n.index + 1);
      }
      return;
    case Expr::Op::kAdd:
      child(*n.lhs, 1);
      os << " + ";
      child(*n.rhs, 1);
      return;
    case Expr::Op::kSub:
      child(*n.lhs, 1);
      os << " - ";
      child(*n.rhs, 2);
      return;
    case Expr::Op::kMul:
      child(*n.lhs, 2);
      os << '*';
      child(*n.rhs, 3);
      return;
    case Expr::Op::kDiv:
      child(*n.lhs, 2);
      os << '/';
      child(*n.rhs, 3);
      return;
    case Expr::Op::kNeg:
      os << '-';
      child(*n.lhs, 3);
      return;
    case Expr::Op::kSin:
    case Expr::Op::kCos:
    case Expr::Op::kExp:
      os << (n.op == Expr::Op::kSin ? "sin(" : n.op == Expr::Op::kCos ? "cos(" : "exp(");
      render(*n.lhs, names, os);
      os << ')';
      return;
    case Expr::Op::kPow:
      child(*n.lhs, 5);
      os << '^';
      if (n.index < 0) {
        os << '(' << n.index << ')';
      } else {
        os << n.index;
      }
      return;
  }
}

}  // namespace

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(int index) {
  if (index < 0) throw InvalidArgument("coordinate index must be non-negative");
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->index = index;
  n->max_var = index;
  return Expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_node(Expr::Op::kAdd, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_node(Expr::Op::kSub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_node(Expr::Op::kMul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_node(Expr::Op::kDiv, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make_node(Expr::Op::kNeg, a.node_)); }
Expr sin(const Expr& a) { return Expr(make_node(Expr::Op::kSin, a.node_)); }
Expr cos(const Expr& a) { return Expr(make_node(Expr::Op::kCos, a.node_)); }
Expr exp(const Expr& a) { return Expr(make_node(Expr::Op::kExp, a.node_)); }

Expr pow(const Expr& a, int exponent) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::kPow;
  n->index = exponent;
  n->lhs = a.node_;
  n->max_var = a.node_->max_var;
  return Expr(std::move(n));
}

double Expr::eval(std::span<const double> x) const {
  if (max_variable() >= static_cast<int>(x.size())) {
    throw InvalidArgument("expression references coordinate beyond the point's dimension");
  }
  return eval_node<double>(*node_, x, [](double v) { return v; });
}

Jet Expr::eval(std::span<const Jet> x) const {
  if (x.empty()) throw InvalidArgument("jet evaluation needs at least one coordinate jet");
  if (max_variable() >= static_cast<int>(x.size())) {
    throw InvalidArgument("expression references coordinate beyond the point's dimension");
  }
  const auto& space = x.front().space();
  return eval_node<Jet>(*node_, x, [&space](double v) { return Jet(space, v); });
}

Expr::Op Expr::op() const { return node_->op; }

int Expr::max_variable() const { return node_->max_var; }

std::string Expr::str(std::span<const std::string> names) const {
  std::ostringstream os;
  render(*node_, names, os);
  return os.str();
}

double Constraint::slack(const Eigen::VectorXd& x) const {
  const double m = margin.eval(x);
  switch (rel) {
    case Rel::kGreater:
    case Rel::kGreaterEq:
      return m;
    case Rel::kNotEqual:
      return std::abs(m);
    case Rel::kEqual:
      return -std::abs(m);
  }
  return m;
}

bool Constraint::holds(const Eigen::VectorXd& x) const {
  const double m = margin.eval(x);
  switch (rel) {
    case Rel::kGreater:
      return m > 0.0;
    case Rel::kGreaterEq:
      return m >= 0.0;
    case Rel::kNotEqual:
      return m != 0.0;
    case Rel::kEqual:
      return m == 0.0;
  }
  return false;
}

bool Predicate::holds(const Eigen::VectorXd& x) const {
  for (const auto& c : clauses) {
    if (!c.holds(x)) return false;
  }
  return true;
}

std::vector<std::string> default_variable_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> names) : text_(text), names_(names) {}

  Expr parse_full_expression() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

  Predicate parse_full_predicate() {
    Predicate p;
    p.clauses.push_back(relation());
    while (true) {
      skip_ws();
      if (consume("&&")) {
        p.clauses.push_back(relation());
        continue;
      }
      break;
    }
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Constraint relation() {
    Expr lhs = expression();
    Constraint c;
    // Two-character operators first.
    if (consume(">=")) {
      c.margin = lhs - expression();
      c.rel = Constraint::Rel::kGreaterEq;
    } else if (consume("<=")) {
      c.margin = expression() - lhs;
      c.rel = Constraint::Rel::kGreaterEq;
    } else if (consume("!=")) {
      c.margin = lhs - expression();
      c.rel = Constraint::Rel::kNotEqual;
    } else if (consume("==")) {
      c.margin = lhs - expression();
      c.rel = Constraint::Rel::kEqual;
    } else if (consume(">")) {
      c.margin = lhs - expression();
      c.rel = Constraint::Rel::kGreater;
    } else if (consume("<")) {
      c.margin = expression() - lhs;
      c.rel = Constraint::Rel::kGreater;
    } else {
      fail("expected a comparison operator");
    }
    return c;
  }

  Expr expression() {
    Expr e = term();
    while (true) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        e = e + term();
      } else if (c == '-') {
        ++pos_;
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        e = e * unary();
      } else if (c == '/') {
        ++pos_;
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (peek() == '-') {
      ++pos_;
      return -unary();
    }
    if (peek() == '+') {
      ++pos_;
      return unary();
    }
    return power();
  }

  int integer_exponent() {
    skip_ws();
    bool negative = false;
    bool parenthesized = false;
    if (peek() == '(') {
      ++pos_;
      parenthesized = true;
    }
    if (peek() == '-') {
      ++pos_;
      negative = true;
    }
    skip_ws();
    int value = 0;
    const auto* begin = text_.data() + pos_;
    const auto* end = text_.data() + text_.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("expected an integer exponent");
    pos_ += static_cast<std::size_t>(ptr - begin);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("only integer exponents are supported");
    }
    if (parenthesized && !consume(")")) fail("expected ')'");
    return negative ? -value : value;
  }

  Expr power() {
    Expr base = primary();
    if (peek() == '^') {
      ++pos_;
      return pow(base, integer_exponent());
    }
    return base;
  }

  Expr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!consume(")")) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(text_.substr(start, pos_ - start));
      if (name == "sin" || name == "cos" || name == "exp") {
        if (!consume("(")) fail("expected '(' after " + name);
        Expr arg = expression();
        if (!consume(")")) fail("expected ')'");
        return name == "sin" ? sin(arg) : name == "cos" ? cos(arg) : exp(arg);
      }
      if (name == "pow") {
        if (!consume("(")) fail("expected '(' after pow");
        Expr arg = expression();
        if (!consume(",")) fail("expected ',' in pow");
        const int k = integer_exponent();
        if (!consume(")")) fail("expected ')'");
        return pow(arg, k);
      }
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return Expr::variable(static_cast<int>(i));
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail(c == '\0' ? "unexpected end of input" : std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    skip_ws();
    const auto* begin = text_.data() + pos_;
    const auto* end = text_.data() + text_.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return Expr::constant(value);
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, std::span<const std::string> names) {
  return Parser(text, names).parse_full_expression();
}

Predicate parse_predicate(std::string_view text, std::span<const std::string> names) {
  return Parser(text, names).parse_full_predicate();
}

}  // namespace sdstab
