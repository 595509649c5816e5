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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdstab/fields.hpp"

namespace sdstab {

/// Point of R^n with finite coordinates.
class StateVector {
 public:
  explicit StateVector(Eigen::VectorXd coords);
  StateVector(std::initializer_list<double> coords);

  const Eigen::VectorXd& coords() const { return coords_; }
  operator const Eigen::VectorXd&() const { return coords_; }  // NOLINT
  int dim() const { return static_cast<int>(coords_.size()); }
  double norm() const { return coords_.norm(); }
  bool is_origin() const { return coords_.isZero(0.0); }

 private:
  Eigen::VectorXd coords_;
};

/// Open-loop input u: [0, horizon] -> R^m with a declared sup-norm bound.
///
/// The profile is a closed-form function of the controller clock, which the
/// sampled controllers produce lazily. Evaluation outside [0, horizon] clamps.
class ControlSignal {
 public:
  using Profile = std::function<Eigen::VectorXd(double)>;

  static constexpr int kBoundCheckPoints = 1000;

  /// Throws InvalidArgument unless horizon > 0, bound > 0 and the profile
  /// respects the bound on a kBoundCheckPoints-point grid.
  ControlSignal(double horizon, int dim, Profile profile, double bound);

  /// u == 0; the only signal whose bound is 0.
  static ControlSignal zero(double horizon, int dim);
  static ControlSignal constant(double horizon, const Eigen::VectorXd& value);

  double horizon() const { return horizon_; }
  int dim() const { return dim_; }
  double bound() const { return bound_; }
  Eigen::VectorXd operator()(double t) const;
  /// Largest |u(t)| over an equally spaced grid of `points` instants.
  double max_norm_on_grid(int points = kBoundCheckPoints) const;

 private:
  ControlSignal() = default;

  double horizon_ = 0.0;
  int dim_ = 0;
  std::shared_ptr<const Profile> profile_;
  double bound_ = 0.0;
};

/// x' = rhs(x, u) with rhs(0, 0) = 0.
class GeneralSystem {
 public:
  using Rhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  static constexpr double kEquilibriumTolerance = 1e-12;

  GeneralSystem(int state_dim, int input_dim, Rhs rhs, std::optional<double> lipschitz_hint = {});

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  std::optional<double> lipschitz_hint() const { return lipschitz_hint_; }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return (*rhs_)(x, u);
  }

 private:
  int n_;
  int m_;
  std::shared_ptr<const Rhs> rhs_;
  std::optional<double> lipschitz_hint_;
};

/// x' = A(x) x + B(x) u.
class StateLinearSystem {
 public:
  using MatrixMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  StateLinearSystem(int state_dim, int input_dim, MatrixMap a, MatrixMap b);
  /// Entries given as expressions over the state coordinates.
  static StateLinearSystem from_expressions(const std::vector<std::vector<Expr>>& a,
                                            const std::vector<std::vector<Expr>>& b);
  static StateLinearSystem constant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  /// Throws InvalidArgument on non-finite entries.
  Eigen::MatrixXd a(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd b(const Eigen::VectorXd& x) const;
  /// Same system with A, B frozen at xi.
  StateLinearSystem frozen(const Eigen::VectorXd& xi) const;

 private:
  int n_;
  int m_;
  std::shared_ptr<const MatrixMap> a_;
  std::shared_ptr<const MatrixMap> b_;
};

/// x' = f(x) + u g(x), scalar input.
class AffineSystem {
 public:
  AffineSystem(VectorField drift, VectorField input_field);

  int state_dim() const { return drift_.vars(); }
  const VectorField& drift() const { return drift_; }
  const VectorField& input_field() const { return input_field_; }

 private:
  VectorField drift_;
  VectorField input_field_;
};

/// T_1 = 0 < T_2 < ... : an explicit prefix, optionally extended by a
/// uniform tail of step h so that T_k -> infinity.
class SamplingPartition {
 public:
  explicit SamplingPartition(std::vector<double> prefix, std::optional<double> tail_step = {});

  std::size_t prefix_size() const { return prefix_.size(); }
  const std::vector<double>& prefix() const { return prefix_; }
  std::optional<double> tail_step() const { return tail_step_; }

  /// T_{k+1} in zero-based indexing; throws past a finite partition's end.
  double time(std::size_t k) const;
  bool from_tail(std::size_t k) const { return k >= prefix_.size(); }
  /// Sampling instants strictly below `horizon`, followed by `horizon`
  /// itself. Throws when a finite partition ends before the horizon.
  std::vector<double> instants_until(double horizon) const;

 private:
  std::vector<double> prefix_;
  std::optional<double> tail_step_;
};

/// Sampled solution of a controlled ODE. If `escaped`, the last stored state
/// is the first one that crossed the blow-up threshold (possibly non-finite).
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  bool escaped = false;
  double escape_time = 0.0;

  bool empty() const { return times.empty(); }
  const Eigen::VectorXd& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

/// T_k = (k - 1) h for k = 1..count, uniform tail h.
SamplingPartition make_uniform_partition(double h, int count);

GeneralSystem state_linear_as_general(const StateLinearSystem& sys);
GeneralSystem affine_as_general(const AffineSystem& sys);

}  // namespace sdstab
