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

#include "sdstab/sampling.hpp"

#include <array>
#include <cmath>
#include <random>

#include "sdstab/errors.hpp"

namespace sdstab {

namespace {

constexpr std::array<int, 20> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed) : dim_(dim), shift_(Eigen::VectorXd::Zero(dim)) {
  if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
    throw InvalidArgument("Halton sequence supports dimensions 1.." + std::to_string(kPrimes.size()));
  }
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < dim; ++i) shift_[i] = unit(rng);
  }
}

Eigen::VectorXd HaltonSequence::next() {
  Eigen::VectorXd p(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double v = radical_inverse(index_, kPrimes[i]) + shift_[i];
    p[i] = v - std::floor(v);
  }
  ++index_;
  return p;
}

std::vector<Eigen::VectorXd> box_samples(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int count,
                                         std::uint64_t seed) {
  if (lo.size() != hi.size() || (hi - lo).minCoeff() <= 0.0) throw InvalidArgument("degenerate sampling box");
  HaltonSequence seq(static_cast<int>(lo.size()), seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo).cwiseProduct(seq.next()));
  return out;
}

std::vector<Eigen::VectorXd> ball_samples(int dim, double radius, int count, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  HaltonSequence seq(dim, seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Eigen::VectorXd p = radius * (2.0 * seq.next().array() - 1.0).matrix();
    if (p.norm() <= radius) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace sdstab
