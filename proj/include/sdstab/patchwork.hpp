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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdstab/expression.hpp"
#include "sdstab/fields.hpp"

namespace sdstab {

constexpr double kBoundaryTolerance = 1e-7;

/// Continuous, nondecreasing, zero at zero.
class ClassK {
 public:
  explicit ClassK(std::function<double(double)> fn, std::string name = "custom");
  static ClassK linear(double slope);
  /// coef * s^exponent.
  static ClassK power(double coef, double exponent);

  double operator()(double s) const { return fn_(s); }
  const std::string& name() const { return name_; }

 private:
  std::function<double(double)> fn_;
  std::string name_;
};

/// Open set given by a predicate intersected with the open box (lo, hi).
/// Boundary membership is numeric: the strict interior needs every slack
/// above `tol`, the closure every slack above -tol.
class Region {
 public:
  Region(Predicate membership, Eigen::VectorXd lo, Eigen::VectorXd hi, double tol = kBoundaryTolerance);

  int dim() const { return static_cast<int>(lo_.size()); }
  double tol() const { return tol_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  /// Smallest constraint slack, box faces included.
  double min_slack(const Eigen::VectorXd& x) const;
  bool interior(const Eigen::VectorXd& x) const { return min_slack(x) > tol_; }
  bool in_closure(const Eigen::VectorXd& x) const { return min_slack(x) >= -tol_; }

 private:
  Predicate membership_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  double tol_;
};

struct LyapunovPiece {
  LyapunovPiece(ScalarField v, Region region, ClassK omega1, ClassK omega2);

  ScalarField v;
  Region region;
  ClassK omega1;
  ClassK omega2;
};

/// Pieces with offsets c_i and the derived envelopes
///   a1(s) = min_i omega1_i(s) + c_min min(1, s / rho),
///   a2(s) = max_i omega2_i(s) + c_max min(1, s / rho).
/// W jumps to at least c_min next to the origin, so no class-K upper bound
/// exists on a full neighborhood of 0; a2 is only claimed for |x| >= rho.
class PatchworkFamily {
 public:
  PatchworkFamily(std::vector<LyapunovPiece> pieces, std::vector<double> offsets, double inner_radius = 1e-3,
                  ClassK comparison = ClassK::linear(2.0));

  std::size_t size() const { return pieces_.size(); }
  int dim() const { return pieces_.front().region.dim(); }
  const std::vector<LyapunovPiece>& pieces() const { return pieces_; }
  const std::vector<double>& offsets() const { return offsets_; }
  double inner_radius() const { return inner_radius_; }
  double tol() const { return tol_; }
  const ClassK& comparison() const { return comparison_; }

  double a1(double s) const;
  double a2(double s) const;

 private:
  std::vector<LyapunovPiece> pieces_;
  std::vector<double> offsets_;
  double inner_radius_;
  double tol_;
  ClassK comparison_;
};

struct ActiveIndex {
  int index = -1;
  /// Another adjacent piece is within 10 tol of the maximum.
  bool distinctness_violation = false;
};

/// W(x) = V_i(x) + c_i inside A_i, the max over adjacent pieces on
/// boundaries, and 0 at the origin.
class PatchworkW {
 public:
  explicit PatchworkW(PatchworkFamily family) : family_(std::move(family)) {}

  struct Value {
    double value = 0.0;
    /// Pieces attaining the value; empty at the origin.
    std::vector<int> active;
    bool on_boundary = false;
  };

  const PatchworkFamily& family() const { return family_; }

  /// Throws UncoveredPoint when x is outside every closure.
  Value eval(const Eigen::VectorXd& x) const;
  double operator()(const Eigen::VectorXd& x) const { return eval(x).value; }

  double piece_value(int i, const Eigen::VectorXd& x) const;
  /// Index of the region containing x in its strict interior, or -1.
  int interior_region(const Eigen::VectorXd& x) const;
  /// Regions whose closure contains x.
  std::vector<int> adjacent(const Eigen::VectorXd& x) const;

  /// Largest index attaining the boundary maximum. Throws InvalidArgument at
  /// interior points and at the origin.
  ActiveIndex active_index(const Eigen::VectorXd& x) const;

 private:
  PatchworkFamily family_;
};

/// A point on the shared boundary of regions `from` and `to`, found by
/// bisecting the segment between two interior anchors.
struct BoundarySample {
  Eigen::VectorXd point;
  int from = -1;
  int to = -1;
  Eigen::VectorXd anchor_from;
  Eigen::VectorXd anchor_to;
};

/// Bisects segments between consecutive quasi-random points of B[0, radius]
/// that lie in different regions.
std::vector<BoundarySample> sample_boundaries(const std::vector<LyapunovPiece>& pieces, double radius, int pairs,
                                              std::uint64_t seed = 0);

struct OffsetChoice {
  std::vector<double> offsets;
  double c0 = 0.0;
  double delta = 0.0;
};

/// c_i = c0 (1 + i delta), searching c0 in {1e-3, 3e-3, ..., 1} and delta in
/// {0.1, ..., 1} until every boundary point separates all adjacent pieces by
/// more than 10 tol and a(V_i) + c_i < 2 a(V_i + c_i) at every region point.
/// Throws OffsetSelectionFailure carrying a colliding point.
OffsetChoice choose_offsets(const std::vector<LyapunovPiece>& pieces,
                            const std::vector<Eigen::VectorXd>& boundary_points,
                            const std::vector<Eigen::VectorXd>& region_points = {},
                            const ClassK& comparison = ClassK::linear(2.0));
OffsetChoice choose_offsets(const std::vector<LyapunovPiece>& pieces, int boundary_samples, double radius,
                            std::uint64_t seed = 0, const ClassK& comparison = ClassK::linear(2.0));

struct VerificationCheck {
  std::string name;
  bool passed = true;
  bool vacuous = false;
  std::size_t checked = 0;
  std::optional<Eigen::VectorXd> witness;
  std::string detail;
};

struct PatchworkReport {
  std::vector<VerificationCheck> checks;
  bool passed() const;
  const VerificationCheck& check(const std::string& name) const;
};

struct VerifyOptions {
  double radius = 2.0;
  int samples = 10000;
  int boundary_pairs = 2000;
  /// Perturbation size for the active-index stability check.
  double perturbation = 1e-3;
  std::uint64_t seed = 0;
};

/// Sampled checks of coverage/disjointness, piece envelopes, the sandwich
/// a1(|x|) <= W(x) <= a2(|x|), boundary distinctness, upper semicontinuity and
/// active-index stability. Failures are reported, not thrown.
PatchworkReport verify_patchwork(const PatchworkW& w, const VerifyOptions& options = {});

}  // namespace sdstab
