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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdstab/odeint.hpp"
#include "sdstab/patchwork.hpp"
#include "sdstab/synth.hpp"
#include "sdstab/sysmodel.hpp"

namespace sdstab {

/// Open-loop input chosen at one sampling instant.
struct Plan {
  ControlSignal signal;
  std::string descriptor;
  /// Frozen-gain data at the sample, when the plan came from synthesis.
  std::optional<GainSynthesisResult> synthesis;
  /// Patchwork piece that produced the plan, or -1.
  int piece = -1;
};

/// Maps a sampled state xi and a step eps to an input on [0, eps]. The
/// controller clock restarts at every sampling instant, and plan(0, eps) is
/// always the zero signal.
class SampledController {
 public:
  using PlanFn = std::function<Plan(const StateVector& xi, double eps)>;

  SampledController(int input_dim, std::string descriptor, PlanFn fn);

  int input_dim() const { return m_; }
  const std::string& descriptor() const { return descriptor_; }
  Plan plan(const StateVector& xi, double eps) const;

 private:
  int m_;
  std::string descriptor_;
  PlanFn fn_;
};

SampledController zero_controller(int input_dim);

/// Per sample: F(xi), P(xi) from the frozen pair (A(xi), B(xi)), then the
/// internal model x^' = (A(x^) + B(x^) F(xi)) x^ from x^(0) = xi. The signal is
/// u(t) = F(xi) x^(t), with x^ interpolated by cubic Hermite polynomials between
/// model grid points. With zero_order_hold the signal is u = F(xi) xi instead.
SampledController frozen_gain_controller(const StateLinearSystem& sys, const IntegrationConfig& cfg = {},
                                         bool zero_order_hold = false);

/// Dispatches to the piece containing xi, or to the active index on a
/// boundary. Throws ControllerError at points outside every region closure.
SampledController patchwork_controller(const PatchworkW& w, std::vector<SampledController> piece_controllers);

struct IntervalRecord {
  std::size_t k = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  Eigen::VectorXd xi;
  Eigen::VectorXd x_end;
  /// Trajectory indices of the interval's first and last grid points.
  std::size_t first = 0;
  std::size_t last = 0;
  double control_bound = 0.0;
  double excursion = 0.0;
  bool from_tail = false;
  bool escaped = false;
};

struct ClosedLoopRun {
  std::vector<double> instants;
  Trajectory trajectory;
  /// Input applied at each trajectory grid point.
  std::vector<Eigen::VectorXd> inputs;
  std::vector<IntervalRecord> intervals;
  std::vector<Plan> plans;
  bool escaped = false;
  /// Set when the controller failed; the run holds everything before it.
  std::optional<std::string> abort_reason;
  std::optional<Eigen::VectorXd> abort_witness;
};

/// Samples xi_k = x(T_k), asks the controller for a plan on [T_k, T_{k+1}]
/// and integrates the plant under it. Escape and controller failure are
/// recorded in the run.
ClosedLoopRun run_closed_loop(const GeneralSystem& plant, const SampledController& ctrl,
                              const SamplingPartition& partition, const StateVector& x0, double horizon,
                              const IntegrationConfig& cfg = {});

/// Lyapunov function used on interval k; it may depend on the sample.
using IntervalFunction = std::function<double(const ClosedLoopRun& run, std::size_t k, const Eigen::VectorXd& x)>;

/// V_k(x) = x' P(xi_k) x / 2 with P from the interval's plan; 0 when the plan
/// carries no synthesis (the equilibrium sample).
IntervalFunction per_sample_quadratic();
IntervalFunction fixed_function(std::function<double(const Eigen::VectorXd&)> v);

constexpr double kMarginalDecrease = 1e-10;

struct IntervalCertificate {
  std::size_t k = 0;
  double t_start = 0.0;
  double eps = 0.0;
  double v_start = 0.0;
  double v_end = 0.0;
  double margin = 0.0;  // L_k = V_k(xi_k) - V_k(x(T_{k+1}))
  double v_max = 0.0;
  bool bound_ok = false;  // v_max <= a(v_start)
  double excursion_ratio = 0.0;  // C_k = max |x(t) - xi_k| / eps
  bool waived = false;  // xi_k = 0
  bool marginal = false;  // 0 < L_k < kMarginalDecrease
  bool passed = false;
};

struct DecreaseCertificate {
  std::vector<IntervalCertificate> intervals;
  /// min L_k over non-waived intervals (infinity when all are waived).
  double uniform_margin = 0.0;
  bool escaped = false;
  bool aborted = false;
  std::size_t marginal_count = 0;
  std::size_t failures = 0;
  bool passed = false;
};

/// Requires at least one interval. Passes iff no escape or abort and every
/// interval has L_k > 0 (waived at xi_k = 0) and v_max <= a(v_start).
DecreaseCertificate certify_decrease(const ClosedLoopRun& run, const IntervalFunction& v, const ClassK& a);

struct AcceptedStep {
  double eps = 0.0;
  int halvings = 0;
  DecreaseCertificate certificate;
};

/// Tries eps0, eps0/2, ... (at most 20 halvings) until a single-interval run
/// from xi passes certify_decrease without a marginal margin. Throws
/// NoCertifiedStep with the per-candidate trace when none does.
AcceptedStep adapt_epsilon(const GeneralSystem& plant, const SampledController& ctrl, const StateVector& xi,
                           const IntervalFunction& v, const ClassK& a, double eps0, const IntegrationConfig& cfg = {});

}  // namespace sdstab
