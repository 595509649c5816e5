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

#include "sdstab/sdfctl.hpp"

#include <cmath>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "sdstab/errors.hpp"

namespace sdstab {
namespace {

StateVector sv(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double c : v) x[i++] = c;
  return StateVector(x);
}

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  Eigen::MatrixXd m(r, c);
  int i = 0;
  for (double e : v) {
    m(i / c, i % c) = e;
    ++i;
  }
  return m;
}

StateLinearSystem scalar_lti(double a, double b) { return StateLinearSystem::constant(mat(1, 1, {a}), mat(1, 1, {b})); }

GeneralSystem scalar_plant(std::function<double(double, double)> rhs) {
  return GeneralSystem(1, 1, [rhs](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return Eigen::VectorXd::Constant(1, rhs(x[0], u[0]));
  });
}

double sq_norm(const Eigen::VectorXd& x) { return x.squaredNorm(); }

TEST(FrozenGainTest, ScalarExample) {
  const auto sys = scalar_lti(1.0, 1.0);
  const auto ctrl = frozen_gain_controller(sys);
  const Plan p = ctrl.plan(sv({1.0}), 0.1);
  ASSERT_TRUE(p.synthesis.has_value());
  EXPECT_NEAR(p.synthesis->gain(0, 0), -(1.0 + std::sqrt(2.0)), 1e-10);
  EXPECT_EQ(p.descriptor, "frozen-gain");
  for (double t : {0.0, 0.03, 0.05, 0.1}) {
    EXPECT_NEAR(p.signal(t)[0], -(1.0 + std::sqrt(2.0)) * std::exp(-std::sqrt(2.0) * t), 1e-9) << t;
  }
  const auto run = run_closed_loop(state_linear_as_general(sys), ctrl, SamplingPartition({0.0, 0.1}), sv({1.0}), 0.1);
  EXPECT_NEAR(run.trajectory.final_state()[0], std::exp(-0.1 * std::sqrt(2.0)), 1e-6);
}

TEST(FrozenGainTest, ZeroSampleGivesZeroSignal) {
  const auto ctrl = frozen_gain_controller(scalar_lti(1.0, 1.0));
  const Plan p = ctrl.plan(sv({0.0}), 0.5);
  EXPECT_EQ(p.signal.bound(), 0.0);
  EXPECT_EQ(p.signal(0.2)[0], 0.0);
  EXPECT_FALSE(p.synthesis.has_value());
}

TEST(FrozenGainTest, SignalRespectsItsBound) {
  const auto sys = StateLinearSystem::constant(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}));
  const Plan p = frozen_gain_controller(sys).plan(sv({1.0, -0.5}), 0.5);
  EXPECT_LE(p.signal.max_norm_on_grid(), p.signal.bound());
}

TEST(FrozenGainTest, ZeroOrderHoldVariant) {
  const Plan p = frozen_gain_controller(scalar_lti(1.0, 1.0), {}, true).plan(sv({2.0}), 0.1);
  EXPECT_EQ(p.descriptor, "frozen-gain-zoh");
  EXPECT_NEAR(p.signal(0.0)[0], -2.0 * (1.0 + std::sqrt(2.0)), 1e-10);
  EXPECT_EQ(p.signal(0.0)[0], p.signal(0.1)[0]);
}

TEST(FrozenGainTest, SynthesisFailureBecomesControllerError) {
  // x1' = x1 with no input on x1.
  const auto sys = StateLinearSystem::constant(mat(2, 2, {1, 0, 0, 0}), mat(2, 1, {0, 1}));
  try {
    frozen_gain_controller(sys).plan(sv({1.0, 2.0}), 0.1);
    FAIL() << "expected ControllerError";
  } catch (const ControllerError& e) {
    EXPECT_EQ(e.witness(), sv({1.0, 2.0}).coords());
  }
  const auto run = run_closed_loop(state_linear_as_general(sys), frozen_gain_controller(sys),
                                   make_uniform_partition(0.1, 5), sv({1.0, 2.0}), 0.5);
  ASSERT_TRUE(run.abort_reason.has_value());
  EXPECT_TRUE(run.intervals.empty());
  EXPECT_EQ(*run.abort_witness, sv({1.0, 2.0}).coords());
}

// For constant (A, B) the internal model equals the plant, so the sampled
// run must follow exp((A + B F) t) x0 on every partition.
TEST(RunClosedLoopTest, LtiMatchesMatrixExponential) {
  const Eigen::MatrixXd a = mat(2, 2, {0, 1, 0, 0});
  const Eigen::MatrixXd b = mat(2, 1, {0, 1});
  const auto sys = StateLinearSystem::constant(a, b);
  const Eigen::MatrixXd f = synthesize_gain(a, b).gain;
  const Eigen::MatrixXd acl = a + b * f;
  const Eigen::Vector2d x0(1.0, -0.5);
  std::vector<SamplingPartition> partitions = {make_uniform_partition(0.01, 1), make_uniform_partition(0.1, 1),
                                               make_uniform_partition(0.5, 1),
                                               SamplingPartition({0.0, 0.05, 0.3, 0.35, 1.0, 1.7}, 0.25)};
  for (const auto& part : partitions) {
    const auto run = run_closed_loop(state_linear_as_general(sys), frozen_gain_controller(sys), part, StateVector(x0), 3.0);
    ASSERT_FALSE(run.escaped);
    for (const auto& rec : run.intervals) {
      const Eigen::Vector2d expect = (acl * rec.t_start).exp() * x0;
      EXPECT_LT((rec.xi - expect).norm(), 1e-6) << rec.t_start;
    }
    EXPECT_LT((run.trajectory.final_state() - (acl * 3.0).exp() * x0).norm(), 1e-6);
  }
}

TEST(RunClosedLoopTest, UnstableScalarIsDrivenDown) {
  const auto sys = scalar_lti(1.0, 1.0);
  const auto run = run_closed_loop(state_linear_as_general(sys), frozen_gain_controller(sys),
                                   make_uniform_partition(0.1, 1), sv({1.0}), 5.0);
  EXPECT_EQ(run.intervals.size(), 50u);
  EXPECT_LE(std::abs(run.trajectory.final_state()[0]), std::exp(-5.0 * std::sqrt(2.0)) + 1e-6);
  EXPECT_TRUE(run.intervals.back().from_tail);
}

TEST(RunClosedLoopTest, ZeroControllerOnDecay) {
  const auto plant = scalar_plant([](double x, double) { return -x; });
  for (double h : {0.1, 0.37}) {
    const auto run = run_closed_loop(plant, zero_controller(1), make_uniform_partition(h, 1), sv({2.0}), 2.0);
    for (std::size_t i = 0; i < run.trajectory.times.size(); ++i) {
      EXPECT_NEAR(run.trajectory.states[i][0], 2.0 * std::exp(-run.trajectory.times[i]), 1e-9);
    }
  }
}

TEST(RunClosedLoopTest, TrajectoryIsContinuousAcrossInstants) {
  const auto sys = scalar_lti(1.0, 1.0);
  const auto run = run_closed_loop(state_linear_as_general(sys), frozen_gain_controller(sys),
                                   SamplingPartition({0.0, 0.2, 0.25}, 0.3), sv({1.0}), 2.0);
  for (std::size_t k = 0; k + 1 < run.intervals.size(); ++k) {
    EXPECT_EQ(run.intervals[k].x_end, run.intervals[k + 1].xi);
    EXPECT_EQ(run.intervals[k].last, run.intervals[k + 1].first);
  }
  for (std::size_t i = 1; i < run.trajectory.times.size(); ++i) {
    EXPECT_GT(run.trajectory.times[i], run.trajectory.times[i - 1]);
  }
  EXPECT_EQ(run.inputs.size(), run.trajectory.times.size());
}

TEST(RunClosedLoopTest, EscapeIsRecorded) {
  const auto plant = scalar_plant([](double x, double) { return x * x; });
  const auto run = run_closed_loop(plant, zero_controller(1), make_uniform_partition(0.1, 1), sv({1.0}), 2.0);
  EXPECT_TRUE(run.escaped);
  EXPECT_TRUE(run.intervals.back().escaped);
  EXPECT_NEAR(run.trajectory.escape_time, 1.0, 1e-2);
  EXPECT_TRUE(certify_decrease(run, fixed_function(sq_norm), ClassK::linear(2.0)).escaped);
}

TEST(CertifyDecreaseTest, LtiQuadraticsPass) {
  const auto sys = scalar_lti(1.0, 1.0);
  const auto run = run_closed_loop(state_linear_as_general(sys), frozen_gain_controller(sys),
                                   make_uniform_partition(0.1, 1), sv({1.0}), 2.0);
  const auto cert = certify_decrease(run, per_sample_quadratic(), ClassK::linear(2.0));
  EXPECT_TRUE(cert.passed);
  EXPECT_EQ(cert.failures, 0u);
  EXPECT_GT(cert.uniform_margin, 0.0);
  for (const auto& ic : cert.intervals) EXPECT_GT(ic.margin, 0.0);
}

TEST(CertifyDecreaseTest, NoDecreaseFails) {
  const auto plant = scalar_plant([](double, double) { return 0.0; });
  const auto run = run_closed_loop(plant, zero_controller(1), make_uniform_partition(0.1, 1), sv({1.0}), 1.0);
  const auto cert = certify_decrease(run, fixed_function(sq_norm), ClassK::linear(2.0));
  EXPECT_FALSE(cert.passed);
  EXPECT_EQ(cert.failures, cert.intervals.size());
  for (const auto& ic : cert.intervals) EXPECT_EQ(ic.margin, 0.0);
}

TEST(CertifyDecreaseTest, MonotoneDecayPasses) {
  const auto plant = scalar_plant([](double x, double) { return -x; });
  const auto run = run_closed_loop(plant, zero_controller(1), make_uniform_partition(0.1, 1), sv({1.0}), 1.0);
  const auto cert = certify_decrease(run, fixed_function(sq_norm), ClassK::linear(2.0));
  EXPECT_TRUE(cert.passed);
  for (const auto& ic : cert.intervals) {
    EXPECT_EQ(ic.v_max, ic.v_start);
    EXPECT_TRUE(ic.bound_ok);
  }
}

TEST(CertifyDecreaseTest, BoundViolationFails) {
  // Logistic growth from 0.1; a(s) = s rejects any growth.
  const auto plant = scalar_plant([](double x, double) { return x * (0.5 - x); });
  const auto run = run_closed_loop(plant, zero_controller(1), make_uniform_partition(0.5, 1), sv({0.1}), 1.0);
  const auto cert = certify_decrease(run, fixed_function(sq_norm), ClassK::linear(1.0));
  EXPECT_FALSE(cert.passed);
  EXPECT_FALSE(cert.intervals.front().bound_ok);
}

TEST(CertifyDecreaseTest, EquilibriumIsWaivedAndEmptyRunRejected) {
  const auto plant = scalar_plant([](double x, double u) { return x + u; });
  const auto sys = scalar_lti(1.0, 1.0);
  const auto run = run_closed_loop(plant, frozen_gain_controller(sys), make_uniform_partition(0.1, 1), sv({0.0}), 0.5);
  const auto cert = certify_decrease(run, fixed_function(sq_norm), ClassK::linear(2.0));
  EXPECT_TRUE(cert.passed);
  for (const auto& ic : cert.intervals) EXPECT_TRUE(ic.waived);
  EXPECT_TRUE(std::isinf(cert.uniform_margin));

  ClosedLoopRun empty;
  EXPECT_THROW(certify_decrease(empty, fixed_function(sq_norm), ClassK::linear(2.0)), InvalidArgument);
}

TEST(CertifyDecreaseTest, MarginsAddUp) {
  const auto plant = scalar_plant([](double x, double u) { return x + u; });
  const auto ctrl = frozen_gain_controller(scalar_lti(1.0, 1.0));
  const auto run = run_closed_loop(plant, ctrl, SamplingPartition({0.0, 0.07, 0.3}, 0.2), sv({1.5}), 3.0);
  const auto v = fixed_function(sq_norm);
  const auto cert = certify_decrease(run, v, ClassK::linear(2.0));
  ASSERT_TRUE(cert.passed);
  double total = 0.0;
  for (const auto& ic : cert.intervals) total += ic.margin;
  const double v0 = sq_norm(run.intervals.front().xi);
  const double vk = sq_norm(run.intervals.back().x_end);
  EXPECT_LE(vk, v0 - total + 1e-8 * static_cast<double>(cert.intervals.size()));
}

TEST(CertifyDecreaseTest, ExcursionRatioStaysBoundedUnderHalving) {
  const auto sys = StateLinearSystem::constant(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}));
  const auto ctrl = frozen_gain_controller(sys);
  const auto plant = state_linear_as_general(sys);
  std::vector<double> ratios;
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto run = run_closed_loop(plant, ctrl, SamplingPartition({0.0, eps}), sv({1.0, 0.5}), eps);
    ratios.push_back(certify_decrease(run, per_sample_quadratic(), ClassK::linear(2.0)).intervals[0].excursion_ratio);
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    EXPECT_LE(ratios[i], 2.0 * ratios[i - 1]);
    EXPECT_GE(ratios[i], 0.5 * ratios[i - 1]);
  }
}

TEST(CausalityTest, PlanIsPureAndIgnoresTheFuture) {
  const auto sys = StateLinearSystem::constant(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}));
  const auto ctrl = frozen_gain_controller(sys);
  const Plan p1 = ctrl.plan(sv({0.3, -0.2}), 0.25);
  const Plan p2 = ctrl.plan(sv({0.3, -0.2}), 0.25);
  for (double t : {0.0, 0.1, 0.25}) EXPECT_EQ(p1.signal(t), p2.signal(t));

  // A perturbed plant changes only what happens after the first interval.
  const auto plant = state_linear_as_general(sys);
  const GeneralSystem kicked(2, 1, [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd dx(2);
    dx << x[1], u[0] + 0.5 * x[0] * x[0];
    return dx;
  });
  const auto part = make_uniform_partition(0.25, 1);
  const auto a = run_closed_loop(plant, ctrl, part, sv({0.3, -0.2}), 1.0);
  const auto b = run_closed_loop(kicked, ctrl, part, sv({0.3, -0.2}), 1.0);
  for (double t : {0.0, 0.1, 0.25}) EXPECT_EQ(a.plans[0].signal(t), b.plans[0].signal(t));
  EXPECT_NE(a.intervals[1].xi, b.intervals[1].xi);

  const auto longer = run_closed_loop(plant, ctrl, part, sv({0.3, -0.2}), 2.0);
  for (std::size_t k = 0; k < a.intervals.size(); ++k) EXPECT_EQ(a.intervals[k].x_end, longer.intervals[k].x_end);
}

// 1-D fixture: A_1 = (0, 3), A_2 = (-3, 0), V_i = x^2.
PatchworkW line_w(double c1, double c2) {
  const std::vector<std::string> vars = {"x1"};
  auto region = [&](const std::string& p) {
    return Region(parse_predicate(p, vars), Eigen::VectorXd::Constant(1, -3.0), Eigen::VectorXd::Constant(1, 3.0));
  };
  return PatchworkW(PatchworkFamily({LyapunovPiece(parse_scalar_field("x1^2", vars), region("x1 > 0"),
                                                   ClassK::power(1, 2), ClassK::power(1, 2)),
                                     LyapunovPiece(parse_scalar_field("x1^2", vars), region("x1 < 0"),
                                                   ClassK::power(1, 2), ClassK::power(1, 2))},
                                    {c1, c2}));
}

SampledController tagged(double value) {
  return SampledController(1, "tag", [value](const StateVector&, double eps) {
    return Plan{ControlSignal::constant(eps, Eigen::VectorXd::Constant(1, value)), "tag", std::nullopt};
  });
}

TEST(PatchworkControllerTest, Dispatch) {
  const auto ctrl = patchwork_controller(line_w(0.1, 0.2), {tagged(1.0), tagged(2.0)});
  const Plan inside = ctrl.plan(sv({0.5}), 0.1);
  EXPECT_EQ(inside.piece, 0);
  EXPECT_EQ(inside.signal(0.0)[0], 1.0);
  EXPECT_EQ(inside.descriptor, "patchwork-piece-1/tag");
  EXPECT_EQ(ctrl.plan(sv({-0.5}), 0.1).piece, 1);

  // On the boundary the active index (largest W value) decides.
  const Eigen::VectorXd edge = Eigen::VectorXd::Constant(1, 1e-9);
  const Plan on_edge = ctrl.plan(StateVector(edge), 0.1);
  EXPECT_EQ(on_edge.piece, 1);
  EXPECT_EQ(on_edge.signal(0.0)[0], 2.0);
  EXPECT_EQ(patchwork_controller(line_w(0.2, 0.1), {tagged(1.0), tagged(2.0)}).plan(StateVector(edge), 0.1).piece, 0);

  EXPECT_EQ(ctrl.plan(sv({0.0}), 0.1).signal.bound(), 0.0);
  EXPECT_THROW(ctrl.plan(sv({4.0}), 0.1), ControllerError);
  EXPECT_THROW(patchwork_controller(line_w(0.1, 0.2), {tagged(1.0)}), InvalidArgument);
}

TEST(PatchworkControllerTest, PiecePlansOnlyRunInsideTheirClosure) {
  const auto w = line_w(0.1, 0.2);
  const auto sys = scalar_lti(1.0, 1.0);
  std::vector<SampledController> pieces;
  for (int i = 0; i < 2; ++i) {
    const auto inner = frozen_gain_controller(sys);
    pieces.emplace_back(1, "checked", [w, i, inner](const StateVector& xi, double eps) {
      if (!w.family().pieces()[i].region.in_closure(xi.coords())) ADD_FAILURE() << "piece " << i << " at " << xi.coords()[0];
      return inner.plan(xi, eps);
    });
  }
  const auto ctrl = patchwork_controller(w, pieces);
  for (double x0 : {2.0, -1.5, 0.7}) {
    const auto run = run_closed_loop(state_linear_as_general(sys), ctrl, make_uniform_partition(0.2, 1), sv({x0}), 2.0);
    EXPECT_FALSE(run.abort_reason.has_value());
    EXPECT_TRUE(certify_decrease(run, fixed_function([&w](const Eigen::VectorXd& x) { return w(x); }),
                                 ClassK::linear(2.0))
                    .passed);
  }
}

TEST(AdaptEpsilonTest, LtiAcceptsInitialStep) {
  const auto sys = StateLinearSystem::constant(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}));
  const auto step = adapt_epsilon(state_linear_as_general(sys), frozen_gain_controller(sys), sv({1.0, 0.0}),
                                  per_sample_quadratic(), ClassK::linear(2.0), 0.1);
  EXPECT_EQ(step.eps, 0.1);
  EXPECT_EQ(step.halvings, 0);
  EXPECT_TRUE(step.certificate.passed);
}

// The controller plans on the constant model frozen at the sample (A = 6)
// while the plant has A(x) = 1 + 5 x^2.
TEST(AdaptEpsilonTest, MismatchForcesRefinement) {
  const auto plant = scalar_plant([](double x, double u) { return (1.0 + 5.0 * x * x) * x + u; });
  const auto ctrl = frozen_gain_controller(scalar_lti(6.0, 1.0));
  const auto step = adapt_epsilon(plant, ctrl, sv({1.0}), per_sample_quadratic(), ClassK::linear(2.0), 1.0);
  EXPECT_LT(step.eps, 1.0);
  EXPECT_TRUE(step.certificate.passed);
  EXPECT_EQ(step.eps, 0.25);
  EXPECT_EQ(step.halvings, 2);
}

TEST(AdaptEpsilonTest, EquilibriumAcceptsTrivially) {
  const auto sys = scalar_lti(1.0, 1.0);
  const auto step = adapt_epsilon(state_linear_as_general(sys), frozen_gain_controller(sys), sv({0.0}),
                                  fixed_function(sq_norm), ClassK::linear(2.0), 0.3);
  EXPECT_EQ(step.eps, 0.3);
  EXPECT_TRUE(step.certificate.intervals.front().waived);
}

TEST(AdaptEpsilonTest, ExhaustionThrowsWithTrace) {
  const auto plant = scalar_plant([](double, double) { return 0.0; });
  try {
    adapt_epsilon(plant, zero_controller(1), sv({1.0}), fixed_function(sq_norm), ClassK::linear(2.0), 1.0);
    FAIL() << "expected NoCertifiedStep";
  } catch (const NoCertifiedStep& e) {
    EXPECT_EQ(e.witness(), sv({1.0}).coords());
    EXPECT_NE(e.trace().find("eps="), std::string::npos);
  }
  EXPECT_THROW(adapt_epsilon(plant, zero_controller(1), sv({1.0}), fixed_function(sq_norm), ClassK::linear(2.0), 0.0),
               InvalidArgument);
}

}  // namespace
}  // namespace sdstab
