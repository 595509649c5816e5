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

#include <algorithm>
#include <cmath>

#include "sdstab/errors.hpp"

namespace sdstab {

StateVector::StateVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 1) throw InvalidArgument("state vector must have dimension >= 1");
  if (!coords_.allFinite()) throw InvalidArgument("state vector has non-finite entries");
}

StateVector::StateVector(std::initializer_list<double> coords)
    : StateVector(Eigen::Map<const Eigen::VectorXd>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

ControlSignal::ControlSignal(double horizon, int dim, Profile profile, double bound)
    : horizon_(horizon), dim_(dim), profile_(std::make_shared<const Profile>(std::move(profile))), bound_(bound) {
  if (!(horizon > 0.0)) throw InvalidArgument("control horizon must be positive");
  if (dim < 1) throw InvalidArgument("control dimension must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw InvalidArgument("control bound must be positive and finite");
  const double peak = max_norm_on_grid();
  if (!(peak <= bound * (1.0 + 1e-12))) {
    throw InvalidArgument("control signal exceeds its declared bound: " + std::to_string(peak) + " > " +
                          std::to_string(bound));
  }
}

ControlSignal ControlSignal::zero(double horizon, int dim) {
  if (!(horizon > 0.0)) throw InvalidArgument("control horizon must be positive");
  if (dim < 1) throw InvalidArgument("control dimension must be >= 1");
  ControlSignal s;
  s.horizon_ = horizon;
  s.dim_ = dim;
  s.profile_ = std::make_shared<const Profile>([dim](double) { return Eigen::VectorXd::Zero(dim).eval(); });
  s.bound_ = 0.0;
  return s;
}

ControlSignal ControlSignal::constant(double horizon, const Eigen::VectorXd& value) {
  if (value.isZero(0.0)) return zero(horizon, static_cast<int>(value.size()));
  return ControlSignal(horizon, static_cast<int>(value.size()), [value](double) { return value; }, value.norm());
}

Eigen::VectorXd ControlSignal::operator()(double t) const {
  return (*profile_)(std::clamp(t, 0.0, horizon_));
}

double ControlSignal::max_norm_on_grid(int points) const {
  double peak = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = horizon_ * i / (points - 1);
    peak = std::max(peak, (*this)(t).norm());
  }
  return peak;
}

GeneralSystem::GeneralSystem(int state_dim, int input_dim, Rhs rhs, std::optional<double> lipschitz_hint)
    : n_(state_dim), m_(input_dim), rhs_(std::make_shared<const Rhs>(std::move(rhs))), lipschitz_hint_(lipschitz_hint) {
  if (n_ < 1 || m_ < 1) throw InvalidArgument("system dimensions must be >= 1");
  if (lipschitz_hint_ && !(*lipschitz_hint_ > 0.0)) throw InvalidArgument("Lipschitz hint must be positive");
  const Eigen::VectorXd at_origin = (*rhs_)(Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(m_));
  if (at_origin.size() != n_) throw InvalidArgument("right-hand side returns wrong dimension");
  if (!(at_origin.norm() <= kEquilibriumTolerance)) {
    throw InvalidArgument("origin is not an equilibrium: |rhs(0,0)| = " + std::to_string(at_origin.norm()));
  }
}

StateLinearSystem::StateLinearSystem(int state_dim, int input_dim, MatrixMap a, MatrixMap b)
    : n_(state_dim),
      m_(input_dim),
      a_(std::make_shared<const MatrixMap>(std::move(a))),
      b_(std::make_shared<const MatrixMap>(std::move(b))) {
  if (n_ < 1 || m_ < 1) throw InvalidArgument("system dimensions must be >= 1");
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(n_);
  const auto a0 = (*a_)(origin);
  const auto b0 = (*b_)(origin);
  if (a0.rows() != n_ || a0.cols() != n_) throw InvalidArgument("A(x) must be n x n");
  if (b0.rows() != n_ || b0.cols() != m_) throw InvalidArgument("B(x) must be n x m");
}

StateLinearSystem StateLinearSystem::from_expressions(const std::vector<std::vector<Expr>>& a,
                                                      const std::vector<std::vector<Expr>>& b) {
  const int n = static_cast<int>(a.size());
  if (n < 1 || b.size() != a.size() || b.front().empty()) throw InvalidArgument("malformed A/B expression matrices");
  const int m = static_cast<int>(b.front().size());
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n) throw InvalidArgument("A must be square");
    for (const auto& e : row) {
      if (e.max_variable() >= n) throw InvalidArgument("A entry references an unknown coordinate");
    }
  }
  for (const auto& row : b) {
    if (static_cast<int>(row.size()) != m) throw InvalidArgument("B rows must have equal length");
    for (const auto& e : row) {
      if (e.max_variable() >= n) throw InvalidArgument("B entry references an unknown coordinate");
    }
  }
  auto eval_matrix = [](const std::vector<std::vector<Expr>>& entries) {
    return [entries](const Eigen::VectorXd& x) {
      Eigen::MatrixXd out(entries.size(), entries.front().size());
      for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = 0; j < entries[i].size(); ++j) out(i, j) = entries[i][j].eval(x);
      }
      return out;
    };
  };
  return StateLinearSystem(n, m, eval_matrix(a), eval_matrix(b));
}

StateLinearSystem StateLinearSystem::constant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw InvalidArgument("incompatible A/B shapes");
  return StateLinearSystem(static_cast<int>(a.rows()), static_cast<int>(b.cols()),
                           [a](const Eigen::VectorXd&) { return a; }, [b](const Eigen::VectorXd&) { return b; });
}

Eigen::MatrixXd StateLinearSystem::a(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = (*a_)(x);
  if (!out.allFinite()) throw InvalidArgument("A(x) has non-finite entries");
  return out;
}

Eigen::MatrixXd StateLinearSystem::b(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = (*b_)(x);
  if (!out.allFinite()) throw InvalidArgument("B(x) has non-finite entries");
  return out;
}

StateLinearSystem StateLinearSystem::frozen(const Eigen::VectorXd& xi) const { return constant(a(xi), b(xi)); }

AffineSystem::AffineSystem(VectorField drift, VectorField input_field)
    : drift_(std::move(drift)), input_field_(std::move(input_field)) {
  if (!drift_.square() || !input_field_.square() || drift_.vars() != input_field_.vars()) {
    throw InvalidArgument("drift and input field must be square fields of equal dimension");
  }
  const Eigen::VectorXd f0 = drift_(Eigen::VectorXd::Zero(drift_.vars()));
  if (!(f0.norm() <= GeneralSystem::kEquilibriumTolerance)) {
    throw InvalidArgument("drift must vanish at the origin");
  }
}

SamplingPartition::SamplingPartition(std::vector<double> prefix, std::optional<double> tail_step)
    : prefix_(std::move(prefix)), tail_step_(tail_step) {
  if (prefix_.empty() || prefix_.front() != 0.0) throw InvalidArgument("partition must start at T_1 = 0");
  for (std::size_t k = 1; k < prefix_.size(); ++k) {
    if (!(prefix_[k] > prefix_[k - 1])) throw InvalidArgument("partition times must be strictly increasing");
  }
  if (tail_step_ && !(*tail_step_ > 0.0)) throw InvalidArgument("uniform extension step must be positive");
}

double SamplingPartition::time(std::size_t k) const {
  if (k < prefix_.size()) return prefix_[k];
  if (!tail_step_) throw InvalidArgument("sampling index beyond a finite partition");
  return prefix_.back() + static_cast<double>(k - prefix_.size() + 1) * *tail_step_;
}

std::vector<double> SamplingPartition::instants_until(double horizon) const {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  // Instants closer than this to the horizon are merged into it.
  const double merge = 1e-12 * std::max(1.0, horizon);
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    if (k >= prefix_.size() && !tail_step_) {
      throw InvalidArgument("partition ends before the requested horizon");
    }
    const double t = time(k);
    if (t >= horizon - merge) break;
    out.push_back(t);
  }
  out.push_back(horizon);
  return out;
}

SamplingPartition make_uniform_partition(double h, int count) {
  if (!(h > 0.0)) throw InvalidArgument("partition step must be positive");
  if (count < 1) throw InvalidArgument("partition needs at least one instant");
  std::vector<double> times(count);
  for (int k = 0; k < count; ++k) times[k] = k * h;
  return SamplingPartition(std::move(times), h);
}

GeneralSystem state_linear_as_general(const StateLinearSystem& sys) {
  return GeneralSystem(sys.state_dim(), sys.input_dim(),
                       [sys](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
                         return sys.a(x) * x + sys.b(x) * u;
                       });
}

GeneralSystem affine_as_general(const AffineSystem& sys) {
  return GeneralSystem(sys.state_dim(), 1,
                       [sys](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
                         return sys.drift()(x) + u[0] * sys.input_field()(x);
                       });
}

}  // namespace sdstab
