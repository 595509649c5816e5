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

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <Eigen/SVD>

#include "sdstab/errors.hpp"

namespace sdstab {

SampledController::SampledController(int input_dim, std::string descriptor, PlanFn fn)
    : m_(input_dim), descriptor_(std::move(descriptor)), fn_(std::move(fn)) {
  if (m_ < 1) throw InvalidArgument("controller input dimension must be >= 1");
  if (!fn_) throw InvalidArgument("controller needs a plan function");
}

Plan SampledController::plan(const StateVector& xi, double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("sampling step must be positive and finite");
  if (xi.is_origin()) return Plan{ControlSignal::zero(eps, m_), "zero", std::nullopt};
  Plan p = fn_(xi, eps);
  if (p.signal.dim() != m_) throw InvalidArgument("plan returned a signal of the wrong dimension");
  if (std::abs(p.signal.horizon() - eps) > 1e-12 * eps) throw InvalidArgument("plan horizon differs from the step");
  return p;
}

SampledController zero_controller(int input_dim) {
  return SampledController(input_dim, "zero", [input_dim](const StateVector&, double eps) {
    return Plan{ControlSignal::zero(eps, input_dim), "zero", std::nullopt};
  });
}

namespace {

// Piecewise cubic Hermite interpolant through (t_i, x_i) with slopes d_i.
class HermitePath {
 public:
  HermitePath(std::vector<double> t, std::vector<Eigen::VectorXd> x, std::vector<Eigen::VectorXd> d)
      : t_(std::move(t)), x_(std::move(x)), d_(std::move(d)) {}

  Eigen::VectorXd operator()(double t) const {
    if (t <= t_.front()) return x_.front();
    if (t >= t_.back()) return x_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x_[i] + (s3 - 2 * s2 + s) * h * d_[i] + (-2 * s3 + 3 * s2) * x_[i + 1] +
           (s3 - s2) * h * d_[i + 1];
  }

  const std::vector<Eigen::VectorXd>& nodes() const { return x_; }

 private:
  std::vector<double> t_;
  std::vector<Eigen::VectorXd> x_;
  std::vector<Eigen::VectorXd> d_;
};

double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

}  // namespace

SampledController frozen_gain_controller(const StateLinearSystem& sys, const IntegrationConfig& cfg,
                                         bool zero_order_hold) {
  cfg.validate();
  const int m = sys.input_dim();
  const int n = sys.state_dim();
  const std::string name = zero_order_hold ? "frozen-gain-zoh" : "frozen-gain";
  return SampledController(m, name, [sys, cfg, zero_order_hold, m, n, name](const StateVector& xi, double eps) {
    GainSynthesisResult syn;
    try {
      syn = synthesize_gain(sys.a(xi), sys.b(xi));
    } catch (const NotStabilizable& e) {
      throw ControllerError(std::string("gain synthesis failed: ") + e.what(), xi.coords());
    }
    const Eigen::MatrixXd f = syn.gain;
    const double f_norm = spectral_norm(f);

    if (zero_order_hold) {
      return Plan{ControlSignal::constant(eps, f * xi.coords()), name, syn};
    }

    const GeneralSystem model(n, 1, [sys, f](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
      return (sys.a(x) + sys.b(x) * f) * x;
    });
    const Trajectory traj = integrate(model, xi, ControlSignal::zero(eps, 1), 0.0, eps, cfg);
    if (traj.escaped) throw ControllerError("internal model escaped", xi.coords());
    std::vector<Eigen::VectorXd> slopes;
    slopes.reserve(traj.states.size());
    for (const auto& x : traj.states) slopes.push_back(model(x, Eigen::VectorXd::Zero(1)));
    auto path = std::make_shared<const HermitePath>(traj.times, traj.states, std::move(slopes));

    double peak = 0.0;
    for (const auto& x : path->nodes()) peak = std::max(peak, x.norm());
    for (int i = 0; i < ControlSignal::kBoundCheckPoints; ++i) {
      peak = std::max(peak, (*path)(eps * i / (ControlSignal::kBoundCheckPoints - 1)).norm());
    }
    const double bound = f_norm * peak * (1.0 + 1e-12);
    if (!(bound > 0.0)) return Plan{ControlSignal::zero(eps, m), name, syn};
    ControlSignal signal(eps, m, [path, f](double t) -> Eigen::VectorXd { return f * (*path)(t); }, bound);
    return Plan{std::move(signal), name, syn};
  });
}

SampledController patchwork_controller(const PatchworkW& w, std::vector<SampledController> piece_controllers) {
  if (piece_controllers.size() != w.family().size()) throw InvalidArgument("one controller per piece required");
  const int m = piece_controllers.front().input_dim();
  for (const auto& c : piece_controllers) {
    if (c.input_dim() != m) throw InvalidArgument("piece controllers differ in input dimension");
  }
  return SampledController(m, "patchwork", [w, pieces = std::move(piece_controllers)](const StateVector& xi, double eps) {
    int i = w.interior_region(xi);
    if (i < 0) {
      if (w.adjacent(xi).empty()) throw ControllerError("sample lies outside every region closure", xi.coords());
      i = w.active_index(xi).index;
    }
    Plan p = pieces[i].plan(xi, eps);
    p.piece = i;
    p.descriptor = "patchwork-piece-" + std::to_string(i + 1) + "/" + p.descriptor;
    return p;
  });
}

ClosedLoopRun run_closed_loop(const GeneralSystem& plant, const SampledController& ctrl,
                              const SamplingPartition& partition, const StateVector& x0, double horizon,
                              const IntegrationConfig& cfg) {
  if (x0.dim() != plant.state_dim()) throw InvalidArgument("initial state dimension does not match the plant");
  if (ctrl.input_dim() != plant.input_dim()) throw InvalidArgument("controller and plant input dimensions differ");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  cfg.validate();

  ClosedLoopRun run;
  run.instants = partition.instants_until(horizon);
  run.trajectory.times.push_back(run.instants.front());
  run.trajectory.states.push_back(x0.coords());
  run.inputs.push_back(Eigen::VectorXd::Zero(ctrl.input_dim()));

  for (std::size_t k = 0; k + 1 < run.instants.size(); ++k) {
    const double t0 = run.instants[k];
    const double t1 = run.instants[k + 1];
    const Eigen::VectorXd xi = run.trajectory.states.back();
    std::optional<Plan> plan;
    try {
      plan = ctrl.plan(StateVector(xi), t1 - t0);
    } catch (const ControllerError& e) {
      run.abort_reason = e.what();
      run.abort_witness = e.witness();
      break;
    }
    const Trajectory seg = integrate(plant, StateVector(xi), plan->signal, t0, t1, cfg);

    IntervalRecord rec;
    rec.k = k;
    rec.t_start = t0;
    rec.t_end = t1;
    rec.xi = xi;
    rec.first = run.trajectory.times.size() - 1;
    rec.control_bound = plan->signal.bound();
    rec.excursion = max_excursion(seg, xi);
    rec.from_tail = partition.from_tail(k);
    run.inputs.back() = plan->signal(0.0);
    for (std::size_t i = 1; i < seg.times.size(); ++i) {
      run.trajectory.times.push_back(seg.times[i]);
      run.trajectory.states.push_back(seg.states[i]);
      run.inputs.push_back(plan->signal(seg.times[i] - t0));
    }
    rec.last = run.trajectory.times.size() - 1;
    rec.x_end = run.trajectory.states.back();
    rec.escaped = seg.escaped;
    run.intervals.push_back(std::move(rec));
    run.plans.push_back(std::move(*plan));
    if (seg.escaped) {
      run.escaped = true;
      run.trajectory.escaped = true;
      run.trajectory.escape_time = seg.escape_time;
      break;
    }
  }
  return run;
}

IntervalFunction per_sample_quadratic() {
  return [](const ClosedLoopRun& run, std::size_t k, const Eigen::VectorXd& x) {
    const auto& syn = run.plans.at(k).synthesis;
    if (!syn) return 0.0;
    return 0.5 * x.dot(syn->lyapunov * x);
  };
}

IntervalFunction fixed_function(std::function<double(const Eigen::VectorXd&)> v) {
  return [v = std::move(v)](const ClosedLoopRun&, std::size_t, const Eigen::VectorXd& x) { return v(x); };
}

DecreaseCertificate certify_decrease(const ClosedLoopRun& run, const IntervalFunction& v, const ClassK& a) {
  if (run.intervals.empty()) throw InvalidArgument("certificate needs at least one completed interval");
  DecreaseCertificate cert;
  cert.escaped = run.escaped;
  cert.aborted = run.abort_reason.has_value();
  cert.uniform_margin = std::numeric_limits<double>::infinity();
  for (const auto& rec : run.intervals) {
    IntervalCertificate ic;
    ic.k = rec.k;
    ic.t_start = rec.t_start;
    ic.eps = rec.t_end - rec.t_start;
    ic.v_start = v(run, rec.k, rec.xi);
    ic.v_end = v(run, rec.k, rec.x_end);
    ic.v_max = ic.v_start;
    for (std::size_t i = rec.first; i <= rec.last; ++i) {
      ic.v_max = std::max(ic.v_max, v(run, rec.k, run.trajectory.states[i]));
    }
    ic.margin = ic.v_start - ic.v_end;
    ic.bound_ok = ic.v_max <= a(ic.v_start);
    ic.excursion_ratio = rec.excursion / ic.eps;
    ic.waived = rec.xi.isZero(0.0);
    if (!ic.waived) {
      cert.uniform_margin = std::min(cert.uniform_margin, ic.margin);
      ic.marginal = ic.margin > 0.0 && ic.margin < kMarginalDecrease;
    }
    ic.passed = !rec.escaped && ic.bound_ok && std::isfinite(ic.v_max) && (ic.waived || ic.margin > 0.0);
    if (ic.marginal) ++cert.marginal_count;
    if (!ic.passed) ++cert.failures;
    cert.intervals.push_back(ic);
  }
  cert.passed = !cert.escaped && !cert.aborted && cert.failures == 0;
  return cert;
}

AcceptedStep adapt_epsilon(const GeneralSystem& plant, const SampledController& ctrl, const StateVector& xi,
                           const IntervalFunction& v, const ClassK& a, double eps0, const IntegrationConfig& cfg) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw InvalidArgument("initial step must be positive and finite");
  std::ostringstream trace;
  trace.precision(10);
  double eps = eps0;
  for (int halvings = 0; halvings <= 20; ++halvings, eps /= 2) {
    const ClosedLoopRun run = run_closed_loop(plant, ctrl, SamplingPartition({0.0, eps}), xi, eps, cfg);
    trace << "eps=" << eps;
    if (run.intervals.empty()) {
      trace << " aborted: " << run.abort_reason.value_or("no interval") << '\n';
      continue;
    }
    DecreaseCertificate cert = certify_decrease(run, v, a);
    const auto& ic = cert.intervals.front();
    trace << " L=" << ic.margin << " bound_ok=" << ic.bound_ok << " escaped=" << cert.escaped << '\n';
    if (cert.passed && cert.marginal_count == 0) return {eps, halvings, std::move(cert)};
  }
  throw NoCertifiedStep("no step in [eps0 / 2^20, eps0] certifies a decrease", xi.coords(), trace.str());
}

}  // namespace sdstab
