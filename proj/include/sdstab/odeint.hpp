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

#include <Eigen/Core>

#include "sdstab/sysmodel.hpp"

namespace sdstab {

struct IntegrationConfig {
  double step = 1e-3;
  double blowup_norm = 1e6;

  /// Throws InvalidArgument unless step > 0 and blowup_norm > 1.
  void validate() const;
};

/// Classical fixed-step RK4 on [t0, t1] under the open-loop input u, whose
/// clock starts at 0 at t0. The grid is t0 + k*step plus t1 itself; the final
/// partial step is taken explicitly so the last grid time equals t1 exactly.
///
/// Leaving the ball of radius cfg.blowup_norm (or producing a non-finite
/// state) ends the integration and marks the trajectory as escaped.
Trajectory integrate(const GeneralSystem& sys, const StateVector& x0, const ControlSignal& u, double t0,
                     double t1, const IntegrationConfig& cfg = {});

/// max_t |x(t) - x_ref| over the trajectory grid.
double max_excursion(const Trajectory& traj, const Eigen::VectorXd& x_ref);

}  // namespace sdstab
