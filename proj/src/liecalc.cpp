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

#include "sdstab/liecalc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdstab/errors.hpp"
#include "sdstab/sampling.hpp"

namespace sdstab {

VectorField lie_bracket(const VectorField& x, const VectorField& y) { return VectorField::bracket(x, y); }

ScalarField lie_derivative(const VectorField& x, const ScalarField& v) { return ScalarField::lie_derivative(x, v); }

ScalarField iterated_lie_derivative(const VectorField& x, const ScalarField& v, int j) {
  if (j < 0) throw InvalidArgument("iterated Lie derivative needs j >= 0");
  ScalarField out = v;
  for (int i = 0; i < j; ++i) out = ScalarField::lie_derivative(x, out);
  return out;
}

BracketTree::BracketTree(Leaf leaf) {
  auto n = std::make_shared<Node>();
  n->leaf = leaf;
  n->text = leaf == Leaf::kF ? "f" : "g";
  node_ = std::move(n);
}

BracketTree BracketTree::bracket(const BracketTree& lhs, const BracketTree& rhs) {
  auto n = std::make_shared<Node>();
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  n->order = lhs.node_->order + rhs.node_->order;
  n->text = "[" + lhs.str() + "," + rhs.str() + "]";
  return BracketTree(std::move(n));
}

VectorField BracketTree::realize(const VectorField& f, const VectorField& g) const {
  if (is_leaf()) return leaf() == Leaf::kF ? f : g;
  return VectorField::bracket(left().realize(f, g), right().realize(f, g));
}

int bracket_order(const BracketTree& t) { return t.node_->order; }

std::vector<BracketTree> bracket_monomials(int max_order) {
  if (max_order < 1) return {};
  // by_order[k] holds every canonical tree with k leaves, g included.
  std::vector<std::vector<BracketTree>> by_order(max_order + 1);
  by_order[1] = {BracketTree::f(), BracketTree::g()};
  for (int k = 2; k <= max_order; ++k) {
    for (int a = 1; a < k; ++a) {
      for (const auto& x : by_order[a]) {
        for (const auto& y : by_order[k - a]) {
          if (x.str() < y.str()) by_order[k].push_back(BracketTree::bracket(x, y));
        }
      }
    }
  }
  std::vector<BracketTree> out;
  for (int k = 1; k <= max_order; ++k) {
    for (const auto& t : by_order[k]) {
      if (t.is_leaf() && t.leaf() == BracketTree::Leaf::kG) continue;
      out.push_back(t);
    }
  }
  return out;
}

BracketTree ad_pattern_g(int n) {
  BracketTree t = BracketTree::f();
  for (int i = 0; i < n; ++i) t = BracketTree::bracket(t, BracketTree::g());
  return t;
}

BracketTree ad_pattern_f(int n) {
  if (n < 1) throw InvalidArgument("pattern needs at least one bracket");
  BracketTree t = BracketTree::bracket(BracketTree::g(), BracketTree::f());
  for (int i = 1; i < n; ++i) t = BracketTree::bracket(t, BracketTree::f());
  return t;
}

std::string_view clause_name(Clause c) {
  switch (c) {
    case Clause::kInputNonzero: return "input-nonzero";
    case Clause::kDriftDecrease: return "drift-decrease";
    case Clause::kP1: return "P1";
    case Clause::kP2: return "P2";
    case Clause::kP3: return "P3";
    case Clause::kP4: return "P4";
    case Clause::kIntegratorDecrease: return "integrator-decrease";
    case Clause::kIntegratorBracket: return "integrator-bracket";
    case Clause::kIntegratorGradient: return "integrator-gradient";
    case Clause::kFail: return "FAIL";
  }
  return "?";
}

namespace {

double jet_scale(const std::vector<Jet>& jets) {
  double s = 0.0;
  for (const auto& j : jets) s = std::max(s, j.max_abs_coeff());
  return s;
}

struct Applied {
  std::string label;
  ScalarField field;
};

}  // namespace

ConditionReport check_affine_point(const AffineSystem& sys, const ScalarField& v, const Eigen::VectorXd& x,
                                   int n_max) {
  const int n = sys.state_dim();
  if (v.vars() != n || x.size() != n) throw InvalidArgument("dimension mismatch between system, V and point");
  if (n_max < 1 || n_max > kMaxConditionOrder) {
    throw InvalidArgument("N_max must lie in [1, " + std::to_string(kMaxConditionOrder) + "]");
  }
  if (x.isZero(0.0)) throw InvalidArgument("conditions are only defined away from the origin");
  const VectorField& f = sys.drift();
  const VectorField& g = sys.input_field();

  ConditionReport r;
  r.point = x;
  const double scale = std::max(
      {1.0, v.jet(x, 2).max_abs_coeff(), jet_scale(f.jets(x, 1)), jet_scale(g.jets(x, 1))});
  const double tol = kRelativeZeroTolerance * scale;
  r.tolerance = tol;

  auto finish = [&r](Clause c, int n_used) {
    r.classification = c;
    r.n_used = n_used;
    return r;
  };

  const double gv = lie_derivative(g, v)(x);
  r.witnesses.push_back({"(gV)", gv});
  if (std::abs(gv) > tol) return finish(Clause::kInputNonzero, 0);
  const ScalarField fv_field = lie_derivative(f, v);
  const double fv = fv_field(x);
  r.witnesses.push_back({"(fV)", fv});
  if (fv < -tol) return finish(Clause::kDriftDecrease, 0);

  std::vector<BracketTree> monomials = bracket_monomials(n_max);
  std::vector<VectorField> realized;
  realized.reserve(monomials.size());
  for (const auto& m : monomials) realized.push_back(m.realize(f, g));

  // levels[k]: all monomial words of total order exactly k applied to V.
  std::vector<std::vector<Applied>> levels(n_max + 1);
  levels[0].push_back({"V", v});
  ScalarField f_power = v;
  for (int order = 1; order <= n_max; ++order) {
    for (std::size_t i = 0; i < monomials.size(); ++i) {
      const int o = bracket_order(monomials[i]);
      if (o > order) continue;
      for (const auto& inner : levels[order - o]) {
        levels[order].push_back(
            {monomials[i].str() + " " + inner.label, ScalarField::lie_derivative(realized[i], inner.field)});
      }
    }
    double largest = 0.0;
    for (const auto& word : levels[order]) {
      const double value = word.field(x);
      largest = std::max(largest, std::abs(value));
      if (std::abs(value) > tol) {
        r.witnesses.push_back({"(" + word.label + ")", value});
        return finish(Clause::kFail, order);
      }
    }
    r.witnesses.push_back({"max |words of order " + std::to_string(order) + "|", largest});

    f_power = ScalarField::lie_derivative(f, f_power);
    const ScalarField f_next = ScalarField::lie_derivative(f, f_power);
    const double fn1 = f_next(x);
    r.witnesses.push_back({"(f^" + std::to_string(order + 1) + " V)", fn1});
    if (fn1 < -tol) return finish(Clause::kP1, order);

    const BracketTree pg = ad_pattern_g(order);
    const double qg = lie_derivative(pg.realize(f, g), v)(x);
    r.witnesses.push_back({"(" + pg.str() + " V)", qg});
    if (order % 2 == 1 && std::abs(qg) > tol) return finish(Clause::kP2, order);
    if (order % 2 == 0 && qg < -tol) return finish(Clause::kP3, order);

    if (std::abs(fn1) <= tol) {
      const BracketTree pf = ad_pattern_f(order);
      const double qf = lie_derivative(pf.realize(f, g), v)(x);
      r.witnesses.push_back({"(" + pf.str() + " V)", qf});
      if (std::abs(qf) > tol) return finish(Clause::kP4, order);
    }
  }
  return finish(Clause::kFail, n_max);
}

ConditionReport check_integrator_point(const VectorField& big_f, const ScalarField& v, const ScalarField& w,
                                       IntegratorRegion region, const Eigen::VectorXd& p) {
  const int n = big_f.components();
  if (big_f.vars() != n + 1 || v.vars() != n || w.vars() != n + 1 || p.size() != n + 1) {
    throw InvalidArgument("integrator check needs F: R^{n+1} -> R^n, V on R^n, W on R^{n+1}");
  }
  if (p.isZero(0.0)) throw InvalidArgument("conditions are only defined away from the origin");
  const Eigen::VectorXd x = p.head(n);

  ConditionReport r;
  r.point = p;
  const auto fj = big_f.jets(p, 1);
  const double scale =
      std::max({1.0, v.jet(x, 1).max_abs_coeff(), jet_scale(fj), w.jet(p, 1).max_abs_coeff()});
  const double tol = kRelativeZeroTolerance * scale;
  r.tolerance = tol;
  const bool x_zero = x.lpNorm<Eigen::Infinity>() <= tol;

  if (region == IntegratorRegion::kFirst) {
    r.witnesses.push_back({"|x|", x.norm()});
    if (x_zero) return r;
    const Eigen::VectorXd dv = v.gradient(x);
    Eigen::VectorXd fx(n), fy(n);
    for (int i = 0; i < n; ++i) {
      fx[i] = fj[i].value();
      fy[i] = fj[i].gradient()[n];
    }
    const double dvf = dv.dot(fx);
    r.witnesses.push_back({"DV F", dvf});
    if (dvf < -tol) {
      r.classification = Clause::kIntegratorDecrease;
      return r;
    }
    const double dvfy = dv.dot(fy);
    r.witnesses.push_back({"DV dF/dy", dvfy});
    if (std::abs(dvf) <= tol && std::abs(dvfy) > tol) r.classification = Clause::kIntegratorBracket;
    return r;
  }

  const double wy = w.gradient(p)[n];
  r.witnesses.push_back({"dW/dy", wy});
  if (std::abs(wy) <= tol) return r;
  if (x_zero) {
    Eigen::VectorXd on_axis = Eigen::VectorXd::Zero(n + 1);
    on_axis[n] = p[n];
    const double w0 = w(on_axis);
    r.witnesses.push_back({"W(0,y)", w0});
    if (w0 <= tol) return r;
  }
  r.classification = Clause::kIntegratorGradient;
  return r;
}

void require_lyapunov_candidate(const ScalarField& v, const Predicate* region, double radius, int samples,
                                std::uint64_t seed) {
  if (!(radius > 0.0) || samples < 1) throw InvalidArgument("candidate check needs radius > 0 and samples >= 1");
  const int n = v.vars();
  const double v0 = v(Eigen::VectorXd::Zero(n));
  if (std::abs(v0) > 1e-12) {
    throw InvalidArgument("Lyapunov candidate does not vanish at the origin: V(0) = " + std::to_string(v0));
  }
  for (const auto& x : ball_samples(n, radius, samples, seed)) {
    if (x.isZero(0.0)) continue;
    if (region && !region->holds(x)) continue;
    const double value = v(x);
    if (!(value > 0.0)) {
      std::ostringstream os;
      os << "Lyapunov candidate is not positive at (" << x.transpose() << "): V = " << value;
      throw InvalidArgument(os.str());
    }
  }
}

}  // namespace sdstab
