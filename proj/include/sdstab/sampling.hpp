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
#include <vector>

#include <Eigen/Core>

namespace sdstab {

/// Halton low-discrepancy points in [0, 1)^dim. A non-zero seed applies a
/// Cranley-Patterson rotation (a seeded shift modulo 1), so different seeds
/// give different but equally well-spread point sets.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed = 0);

  Eigen::VectorXd next();

 private:
  int dim_;
  std::uint64_t index_ = 1;
  Eigen::VectorXd shift_;
};

/// `count` quasi-random points filling the box [lo, hi].
std::vector<Eigen::VectorXd> box_samples(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int count,
                                         std::uint64_t seed = 0);

/// `count` quasi-random points of the closed ball B[0, radius] in R^dim,
/// drawn by rejection from the enclosing cube.
std::vector<Eigen::VectorXd> ball_samples(int dim, double radius, int count, std::uint64_t seed = 0);

}  // namespace sdstab
