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

#include "sdstab/odeint.hpp"

#include <algorithm>
#include <cmath>

#include "sdstab/errors.hpp"

namespace sdstab {

void IntegrationConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("integration step must be positive");
  if (!(blowup_norm > 1.0)) throw InvalidArgument("blow-up threshold must exceed 1");
}

Trajectory integrate(const GeneralSystem& sys, const StateVector& x0, const ControlSignal& u, double t0, double t1,
                     const IntegrationConfig& cfg) {
  cfg.validate();
  if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) throw InvalidArgument("integration window must have t1 > t0");
  if (x0.dim() != sys.state_dim()) throw InvalidArgument("initial state dimension does not match the system");
  if (u.dim() != sys.input_dim()) throw InvalidArgument("control dimension does not match the system");

  const double span = t1 - t0;
  // Steps shorter than this relative sliver are folded into the previous one.
  const double sliver = 1e-9 * cfg.step;
  auto full_steps = static_cast<long long>(std::floor(span / cfg.step));
  if (span - full_steps * cfg.step <= sliver && full_steps > 0) --full_steps;

  Trajectory traj;
  traj.times.reserve(full_steps + 2);
  traj.states.reserve(full_steps + 2);
  traj.times.push_back(t0);
  traj.states.push_back(x0.coords());

  auto field = [&](double tau, const Eigen::VectorXd& x) { return sys(x, u(tau)); };

  Eigen::VectorXd x = x0.coords();
  for (long long k = 0; k <= full_steps; ++k) {
    const double tau = k * cfg.step;
    const double next_tau = (k == full_steps) ? span : (k + 1) * cfg.step;
    const double h = next_tau - tau;
    const Eigen::VectorXd k1 = field(tau, x);
    const Eigen::VectorXd k2 = field(tau + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(tau + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(next_tau, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t = (k == full_steps) ? t1 : t0 + next_tau;
    traj.times.push_back(t);
    traj.states.push_back(x);
    if (!x.allFinite() || x.norm() > cfg.blowup_norm) {
      traj.escaped = true;
      traj.escape_time = t;
      break;
    }
  }
  return traj;
}

double max_excursion(const Trajectory& traj, const Eigen::VectorXd& x_ref) {
  if (traj.empty()) throw InvalidArgument("excursion of an empty trajectory");
  double peak = 0.0;
  for (const auto& x : traj.states) peak = std::max(peak, (x - x_ref).norm());
  return peak;
}

}  // namespace sdstab
