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

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sdstab/errors.hpp"

namespace sdstab {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

VectorField field(std::vector<std::string> comps, const std::vector<std::string>& names = kXY) {
  return parse_vector_field(comps, names);
}

// Random polynomial of degree <= 3 in n variables.
Expr random_polynomial(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> var(0, n - 1);
  std::uniform_int_distribution<int> degree(0, 3);
  Expr out = Expr::constant(coef(rng));
  for (int term = 0; term < 4; ++term) {
    Expr mono = Expr::constant(coef(rng));
    const int d = degree(rng);
    for (int k = 0; k < d; ++k) mono = mono * Expr::variable(var(rng));
    out = out + mono;
  }
  return out;
}

VectorField random_field(int n, std::mt19937_64& rng) {
  std::vector<Expr> comps;
  for (int i = 0; i < n; ++i) comps.push_back(random_polynomial(n, rng));
  return VectorField(comps);
}

Eigen::MatrixXd fd_jacobian(const VectorField& x, const Eigen::VectorXd& p) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::MatrixXd j(x.components(), x.vars());
  for (int k = 0; k < x.vars(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(x.vars());
    e[k] = h;
    j.col(k) = (x(p + e) - x(p - e)) / (2 * h);
  }
  return j;
}

TEST(LieBracketTest, HandDerivedFixtures) {
  const Eigen::Vector2d p(0.7, -1.3);
  EXPECT_TRUE(lie_bracket(field({"y", "0"}), field({"0", "1"}))(p).isApprox(Eigen::Vector2d(-1, 0), 1e-15));
  EXPECT_EQ(lie_bracket(field({"2", "-1"}), field({"0", "3"}))(p), Eigen::Vector2d::Zero());

  const Eigen::Vector2d q = lie_bracket(field({"x^2", "0"}), field({"0", "x"}))(p);
  EXPECT_NEAR(q[0], 0.0, 1e-12);
  EXPECT_NEAR(q[1], p[0] * p[0], 1e-12);

  const Eigen::Vector2d r = lie_bracket(field({"sin(y)", "0"}), field({"0", "exp(x)"}))(p);
  EXPECT_NEAR(r[0], -std::exp(p[0]) * std::cos(p[1]), 1e-12);
  EXPECT_NEAR(r[1], std::exp(p[0]) * std::sin(p[1]), 1e-12);

  // Linear fields Ax, Bx: [Ax, Bx] = (BA - AB) x.
  Eigen::Matrix2d a, b;
  a << 1, 2, -1, 0.5;
  b << 0, -3, 2, 1;
  const VectorField ax = field({"x + 2*y", "-x + 0.5*y"});
  const VectorField bx = field({"-3*y", "2*x + y"});
  EXPECT_TRUE(lie_bracket(ax, bx)(p).isApprox((b * a - a * b) * p, 1e-12));

  // [[f, g], g] vanishes for the double integrator.
  const VectorField f = field({"y", "0"});
  const VectorField g = field({"0", "1"});
  EXPECT_NEAR(lie_bracket(lie_bracket(f, g), g)(p).norm(), 0.0, 1e-15);
}

TEST(LieBracketTest, DimensionMismatch) {
  EXPECT_THROW(lie_bracket(field({"y", "0"}), VectorField({Expr::variable(0)})), InvalidArgument);
  EXPECT_THROW(lie_derivative(field({"y", "0"}), ScalarField(Expr::variable(0), 1)), InvalidArgument);
}

TEST(LieBracketTest, AntisymmetryAndJacobiOnRandomFields) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng);
    const VectorField x = random_field(n, rng);
    const VectorField y = random_field(n, rng);
    const VectorField z = random_field(n, rng);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = coord(rng);
    EXPECT_LE((lie_bracket(x, y)(p) + lie_bracket(y, x)(p)).norm(), 1e-10);
    const Eigen::VectorXd jacobi = lie_bracket(x, lie_bracket(y, z))(p) + lie_bracket(y, lie_bracket(z, x))(p) +
                                   lie_bracket(z, lie_bracket(x, y))(p);
    EXPECT_LE(jacobi.norm(), 1e-8) << "trial " << trial;
  }
}

TEST(LieBracketTest, AgreesWithFiniteDifferenceJacobians) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    const VectorField x = random_field(n, rng);
    const VectorField y = random_field(n, rng);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = coord(rng);
    const Eigen::VectorXd oracle = fd_jacobian(y, p) * x(p) - fd_jacobian(x, p) * y(p);
    const double scale = std::max(1.0, oracle.lpNorm<Eigen::Infinity>());
    EXPECT_LE((lie_bracket(x, y)(p) - oracle).lpNorm<Eigen::Infinity>(), 1e-6 * scale);
  }
}

TEST(LieDerivativeTest, Examples) {
  const Eigen::Vector2d p(1.5, -0.5);
  const ScalarField half_norm = parse_scalar_field("(x^2 + y^2)/2", kXY);
  EXPECT_NEAR(lie_derivative(field({"-x", "-y"}), half_norm)(p), -p.squaredNorm(), 1e-14);

  const VectorField f = field({"y", "0"});
  const ScalarField v = parse_scalar_field("x^2/2", kXY);
  EXPECT_NEAR(lie_derivative(f, v)(p), p[0] * p[1], 1e-14);
  EXPECT_NEAR(iterated_lie_derivative(f, v, 2)(p), p[1] * p[1], 1e-14);
  EXPECT_EQ(iterated_lie_derivative(f, v, 0)(p), v(p));
}

TEST(LieDerivativeTest, LeibnizRule) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    const VectorField x = random_field(n, rng);
    const ScalarField v(random_polynomial(n, rng), n);
    const ScalarField w(random_polynomial(n, rng), n);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = coord(rng);
    const double lhs = lie_derivative(x, ScalarField::product(v, w))(p);
    const double rhs = lie_derivative(x, v)(p) * w(p) + v(p) * lie_derivative(x, w)(p);
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(BracketTreeTest, OrderAndRendering) {
  const auto f = BracketTree::f();
  const auto g = BracketTree::g();
  EXPECT_EQ(bracket_order(f), 1);
  EXPECT_EQ(bracket_order(BracketTree::bracket(f, g)), 2);
  const auto fgg = BracketTree::bracket(BracketTree::bracket(f, g), g);
  EXPECT_EQ(bracket_order(fgg), 3);
  EXPECT_EQ(fgg.str(), "[[f,g],g]");
  EXPECT_EQ(ad_pattern_g(3).str(), "[[[f,g],g],g]");
  EXPECT_EQ(ad_pattern_f(2).str(), "[[g,f],f]");
  EXPECT_EQ(bracket_order(ad_pattern_g(3)), 4);
}

TEST(BracketTreeTest, MonomialEnumeration) {
  std::set<std::string> two;
  for (const auto& t : bracket_monomials(2)) two.insert(t.str());
  EXPECT_EQ(two, (std::set<std::string>{"f", "[f,g]"}));

  std::set<std::string> three;
  for (const auto& t : bracket_monomials(3)) {
    three.insert(t.str());
    EXPECT_LE(bracket_order(t), 3);
  }
  EXPECT_EQ(three, (std::set<std::string>{"f", "[f,g]", "[[f,g],f]", "[[f,g],g]"}));
  EXPECT_EQ(three.count("g"), 0u);
  EXPECT_TRUE(bracket_monomials(0).empty());
}

AffineSystem double_integrator() { return AffineSystem(field({"y", "0"}), field({"0", "1"})); }

TEST(AffineCheckTest, DoubleIntegratorExamples) {
  const auto sys = double_integrator();
  const ScalarField v = parse_scalar_field("x^2/2", kXY);

  const auto decrease = check_affine_point(sys, v, Eigen::Vector2d(1, -1));
  EXPECT_EQ(decrease.classification, Clause::kDriftDecrease);
  EXPECT_DOUBLE_EQ(decrease.witnesses.at(1).value, -1.0);

  const auto bracket = check_affine_point(sys, v, Eigen::Vector2d(1, 0));
  EXPECT_EQ(bracket.classification, Clause::kP2);
  EXPECT_EQ(bracket.n_used, 1);
  bool saw_bracket = false;
  for (const auto& w : bracket.witnesses) {
    if (w.label == "([f,g] V)") {
      saw_bracket = true;
      EXPECT_NEAR(w.value, -1.0, 1e-14);
    }
  }
  EXPECT_TRUE(saw_bracket);

  const ScalarField energy = parse_scalar_field("(x^2 + y^2)/2", kXY);
  EXPECT_EQ(check_affine_point(sys, energy, Eigen::Vector2d(0, 1)).classification, Clause::kInputNonzero);

  EXPECT_EQ(check_affine_point(sys, v, Eigen::Vector2d(1, 1)).classification, Clause::kFail);
  const auto axis = check_affine_point(sys, v, Eigen::Vector2d(0, 1));
  EXPECT_EQ(axis.classification, Clause::kFail);
  EXPECT_EQ(axis.n_used, 2);
}

TEST(AffineCheckTest, HigherOrderClauses) {
  const AffineSystem g_only_p1(field({"y", "-x"}), field({"0", "1"}));
  const ScalarField v = parse_scalar_field("x^2/2", kXY);
  const auto p1 = check_affine_point(g_only_p1, v, Eigen::Vector2d(1, 0));
  EXPECT_EQ(p1.classification, Clause::kP1);
  EXPECT_EQ(p1.n_used, 1);

  // f = (-y^2, 0): [f,g] = (2y, 0), [[f,g],g] = (-2, 0).
  const AffineSystem quadratic(field({"-y^2", "0"}), field({"0", "1"}));
  const auto p3 = check_affine_point(quadratic, v, Eigen::Vector2d(1, 0));
  EXPECT_EQ(p3.classification, Clause::kP3);
  EXPECT_EQ(p3.n_used, 2);
  // With the opposite sign the even-order bracket is positive, so nothing applies.
  const AffineSystem flipped(field({"y^2", "0"}), field({"0", "1"}));
  EXPECT_EQ(check_affine_point(flipped, v, Eigen::Vector2d(1, 0)).classification, Clause::kFail);

  // Chain of integrators: [[g,f],f] = (1, 0, 0) is the first nonvanishing term.
  const std::vector<std::string> names = {"a", "b", "c"};
  const AffineSystem chain(field({"b", "c", "0"}, names), field({"0", "0", "1"}, names));
  const auto p4 = check_affine_point(chain, parse_scalar_field("a^2/2", names), Eigen::Vector3d(1, 0, 0));
  EXPECT_EQ(p4.classification, Clause::kP4);
  EXPECT_EQ(p4.n_used, 2);
}

TEST(AffineCheckTest, Preconditions) {
  const auto sys = double_integrator();
  const ScalarField v = parse_scalar_field("x^2/2", kXY);
  EXPECT_THROW(check_affine_point(sys, v, Eigen::Vector2d::Zero()), InvalidArgument);
  EXPECT_THROW(check_affine_point(sys, v, Eigen::Vector2d(1, 0), 0), InvalidArgument);
  EXPECT_THROW(check_affine_point(sys, v, Eigen::Vector2d(1, 0), 5), InvalidArgument);
  EXPECT_THROW(check_affine_point(sys, v, Eigen::Vector3d(1, 0, 0)), InvalidArgument);
}

TEST(AffineCheckTest, ClassificationInvariantUnderScaling) {
  const auto sys = double_integrator();
  const ScalarField v = parse_scalar_field("x^2/2", kXY);
  const ScalarField v2 = parse_scalar_field("x^2", kXY);
  const ScalarField e = parse_scalar_field("(x^2 + y^2)/2", kXY);
  const ScalarField e2 = parse_scalar_field("x^2 + y^2", kXY);
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      if (i == 0 && j == 0) continue;
      const Eigen::Vector2d p(0.5 * i, 0.5 * j);
      EXPECT_EQ(check_affine_point(sys, v, p).classification, check_affine_point(sys, v2, p).classification);
      EXPECT_EQ(check_affine_point(sys, e, p).classification, check_affine_point(sys, e2, p).classification);
    }
  }
}

// Sign chart: piece 1 (V = x^2/2) owns {xy <= 0, x != 0}, piece 2
// (V = (x^2 + y^2)/2) owns the remaining points with y != 0.
TEST(AffineCheckTest, DoubleIntegratorGridMatchesSignChart) {
  const auto sys = double_integrator();
  const ScalarField v1 = parse_scalar_field("x^2/2", kXY);
  const ScalarField v2 = parse_scalar_field("(x^2 + y^2)/2", kXY);
  const Predicate d1 = parse_predicate("x*y <= 0 && x != 0", kXY);
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const Eigen::Vector2d p(-2.0 + 0.1 * i, -2.0 + 0.1 * j);
      if (i == 20 && j == 20) continue;
      const double xv = i == 20 ? 0.0 : p[0];
      const double yv = j == 20 ? 0.0 : p[1];
      const Eigen::Vector2d q(xv, yv);
      const bool first = d1.holds(q);
      const auto r = check_affine_point(sys, first ? v1 : v2, q);
      Clause expected = Clause::kInputNonzero;
      if (first) expected = yv == 0.0 ? Clause::kP2 : Clause::kDriftDecrease;
      EXPECT_EQ(r.classification, expected) << q.transpose();
    }
  }
}

TEST(IntegratorCheckTest, Examples) {
  const std::vector<std::string> x_only = {"x"};
  const VectorField big_f(std::vector<Expr>{parse_expression("y", kXY)}, 2);
  const ScalarField v = parse_scalar_field("x^2/2", x_only);
  const ScalarField w = parse_scalar_field("y^2/2", kXY);

  const auto a = check_integrator_point(big_f, v, w, IntegratorRegion::kFirst, Eigen::Vector2d(1, -1));
  EXPECT_EQ(a.classification, Clause::kIntegratorDecrease);
  EXPECT_DOUBLE_EQ(a.witnesses.back().value, -1.0);

  const auto b = check_integrator_point(big_f, v, w, IntegratorRegion::kFirst, Eigen::Vector2d(1, 0));
  EXPECT_EQ(b.classification, Clause::kIntegratorBracket);
  EXPECT_DOUBLE_EQ(b.witnesses.back().value, 1.0);

  const auto c = check_integrator_point(big_f, v, w, IntegratorRegion::kSecond, Eigen::Vector2d(0, 1));
  EXPECT_EQ(c.classification, Clause::kIntegratorGradient);
  EXPECT_DOUBLE_EQ(c.witnesses[0].value, 1.0);
  EXPECT_DOUBLE_EQ(c.witnesses[1].value, 0.5);

  EXPECT_EQ(check_integrator_point(big_f, v, w, IntegratorRegion::kFirst, Eigen::Vector2d(0, 1)).classification,
            Clause::kFail);
  EXPECT_EQ(check_integrator_point(big_f, v, w, IntegratorRegion::kSecond, Eigen::Vector2d(1, 0)).classification,
            Clause::kFail);
  EXPECT_THROW(check_integrator_point(big_f, v, w, IntegratorRegion::kFirst, Eigen::Vector2d::Zero()),
               InvalidArgument);
}

TEST(LyapunovCandidateTest, AcceptsAndRejects) {
  EXPECT_NO_THROW(require_lyapunov_candidate(parse_scalar_field("(x^2 + y^2)/2", kXY), nullptr, 2.0, 500));
  const Predicate off_axis = parse_predicate("x != 0", kXY);
  EXPECT_NO_THROW(require_lyapunov_candidate(parse_scalar_field("x^2/2", kXY), &off_axis, 2.0, 500));
  EXPECT_THROW(require_lyapunov_candidate(parse_scalar_field("x", kXY), nullptr, 2.0, 500), InvalidArgument);
  EXPECT_THROW(require_lyapunov_candidate(parse_scalar_field("x^2 + 1", kXY), nullptr, 2.0, 500), InvalidArgument);
}

}  // namespace
}  // namespace sdstab
