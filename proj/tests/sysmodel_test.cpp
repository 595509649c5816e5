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

#include "sdstab/sysmodel.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sdstab/errors.hpp"

namespace sdstab {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

TEST(PartitionTest, UniformPartitionExamples) {
  const auto p = make_uniform_partition(0.5, 3);
  EXPECT_EQ(p.prefix(), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(make_uniform_partition(1.0, 1).prefix(), (std::vector<double>{0.0}));
  EXPECT_DOUBLE_EQ(make_uniform_partition(0.05, 201).prefix().back(), 10.0);
  EXPECT_THROW(make_uniform_partition(0.0, 3), InvalidArgument);
  EXPECT_THROW(make_uniform_partition(-1.0, 3), InvalidArgument);
  EXPECT_THROW(make_uniform_partition(0.1, 0), InvalidArgument);
}

TEST(PartitionTest, UniformTailExtendsMonotonically) {
  const SamplingPartition p({0.0, 0.3, 0.4}, 0.25);
  EXPECT_DOUBLE_EQ(p.time(2), 0.4);
  EXPECT_DOUBLE_EQ(p.time(3), 0.65);
  EXPECT_DOUBLE_EQ(p.time(5), 1.15);
  EXPECT_FALSE(p.from_tail(2));
  EXPECT_TRUE(p.from_tail(3));
  for (std::size_t k = 1; k < 50; ++k) EXPECT_GT(p.time(k), p.time(k - 1));
  const auto instants = p.instants_until(1.0);
  EXPECT_EQ(instants, (std::vector<double>{0.0, 0.3, 0.4, 0.65, 0.9, 1.0}));
}

TEST(PartitionTest, RejectsInvalidPrefixes) {
  EXPECT_THROW(SamplingPartition({0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(SamplingPartition({0.0, 0.2, 0.2}), InvalidArgument);
  EXPECT_THROW(SamplingPartition({0.0, 0.2}, 0.0), InvalidArgument);
  const SamplingPartition finite({0.0, 0.5});
  EXPECT_THROW(finite.instants_until(1.0), InvalidArgument);
  EXPECT_EQ(finite.instants_until(0.5), (std::vector<double>{0.0, 0.5}));
}

TEST(StateVectorTest, RejectsNonFinite) {
  EXPECT_THROW(StateVector({1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  EXPECT_THROW(StateVector({std::numeric_limits<double>::infinity()}), InvalidArgument);
  EXPECT_TRUE(StateVector({0.0, 0.0}).is_origin());
}

TEST(ControlSignalTest, BoundIsCheckedOnGrid) {
  const ControlSignal ok(1.0, 1, [](double t) { return Eigen::VectorXd::Constant(1, std::sin(3 * t)); }, 1.0);
  EXPECT_LE(ok.max_norm_on_grid(), ok.bound());
  EXPECT_THROW(ControlSignal(1.0, 1, [](double t) { return Eigen::VectorXd::Constant(1, 2 * t); }, 1.0),
               InvalidArgument);
  EXPECT_THROW(ControlSignal(0.0, 1, [](double) { return Eigen::VectorXd::Zero(1); }, 1.0), InvalidArgument);
  const auto z = ControlSignal::zero(0.5, 2);
  EXPECT_EQ(z(0.25), Eigen::Vector2d::Zero());
  EXPECT_EQ(z.bound(), 0.0);
  // Evaluation clamps to the horizon.
  const ControlSignal ramp(1.0, 1, [](double t) { return Eigen::VectorXd::Constant(1, t); }, 1.0);
  EXPECT_DOUBLE_EQ(ramp(2.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(ramp(-1.0)[0], 0.0);
}

TEST(SystemTest, StateLinearAsGeneral) {
  const auto sys = StateLinearSystem::from_expressions(
      {{Expr::constant(0.0), Expr::constant(1.0)}, {Expr::constant(0.0), Expr::constant(0.0)}},
      {{Expr::constant(0.0)}, {Expr::constant(1.0)}});
  const auto g = state_linear_as_general(sys);
  EXPECT_EQ(g(Eigen::Vector2d(1, 2), Eigen::VectorXd::Constant(1, 3.0)), Eigen::Vector2d(2, 3));
  EXPECT_EQ(g(Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1)), Eigen::Vector2d::Zero());

  const auto sys2 = StateLinearSystem::from_expressions(
      {{parse_expression("x", kXY), Expr::constant(0.0)}, {Expr::constant(0.0), Expr::constant(0.0)}},
      {{Expr::constant(0.0)}, {Expr::constant(0.0)}});
  EXPECT_EQ(state_linear_as_general(sys2)(Eigen::Vector2d(2, 0), Eigen::VectorXd::Constant(1, 5.0)),
            Eigen::Vector2d(4, 0));
}

TEST(SystemTest, AffineAsGeneral) {
  const AffineSystem sys(parse_vector_field(std::vector<std::string>{"y", "0"}, kXY),
                         parse_vector_field(std::vector<std::string>{"0", "1"}, kXY));
  const auto g = affine_as_general(sys);
  EXPECT_EQ(g(Eigen::Vector2d(1, 2), Eigen::VectorXd::Constant(1, -1.0)), Eigen::Vector2d(2, -1));
  EXPECT_EQ(g(Eigen::Vector2d(1, 2), Eigen::VectorXd::Zero(1)), Eigen::Vector2d(2, 0));
  EXPECT_EQ(g(Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1)), Eigen::Vector2d::Zero());
}

TEST(SystemTest, EquilibriumIsEnforced) {
  EXPECT_THROW(GeneralSystem(1, 1, [](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
                 return x.array() + 1.0;
               }),
               InvalidArgument);
  EXPECT_THROW(AffineSystem(parse_vector_field(std::vector<std::string>{"1", "0"}, kXY),
                            parse_vector_field(std::vector<std::string>{"0", "1"}, kXY)),
               InvalidArgument);
  EXPECT_THROW(StateLinearSystem::constant(Eigen::Matrix2d::Identity(), Eigen::Vector3d::Ones()), InvalidArgument);
}

TEST(SystemTest, FrozenSystemIsConstant) {
  const auto sys = StateLinearSystem::from_expressions(
      {{parse_expression("sin(x)", kXY), Expr::constant(1.0)}, {Expr::constant(0.0), parse_expression("y^2", kXY)}},
      {{Expr::constant(0.0)}, {Expr::constant(1.0)}});
  const auto frozen = sys.frozen(Eigen::Vector2d(0.5, 2.0));
  EXPECT_EQ(frozen.a(Eigen::Vector2d(9, 9)), sys.a(Eigen::Vector2d(0.5, 2.0)));
}

}  // namespace
}  // namespace sdstab
