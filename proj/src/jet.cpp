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

#include "sdstab/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "sdstab/errors.hpp"

namespace sdstab {

namespace {

// Exponent vectors of total degree `degree` in `vars` variables, lexicographic
// with the first variable's exponent largest first.
void enumerate_degree(int vars, int degree, std::vector<std::vector<int>>& out) {
  std::vector<int> current(vars, 0);
  auto recurse = [&](auto&& self, int var, int remaining) -> void {
    if (var == vars - 1) {
      current[var] = remaining;
      out.push_back(current);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      self(self, var + 1, remaining - e);
    }
  };
  recurse(recurse, 0, degree);
}

}  // namespace

JetSpace::JetSpace(int vars, int order) : vars_(vars), order_(order) {
  if (vars < 1) throw InvalidArgument("jet space needs at least one variable");
  if (order < 0 || order > kMaxJetOrder + 2) {
    throw InvalidArgument("jet order out of range: " + std::to_string(order));
  }
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(vars, d, exponents_);
    graded_end_.push_back(exponents_.size());
  }
  degrees_.reserve(exponents_.size());
  for (const auto& e : exponents_) {
    int deg = 0;
    for (int v : e) deg += v;
    degrees_.push_back(deg);
  }

  std::map<std::vector<int>, std::size_t> lookup;
  for (std::size_t i = 0; i < exponents_.size(); ++i) lookup.emplace(exponents_[i], i);

  raise_.assign(exponents_.size() * vars_, -1);
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (degrees_[i] == order_) continue;
    for (int v = 0; v < vars_; ++v) {
      auto e = exponents_[i];
      ++e[v];
      raise_[i * vars_ + v] = static_cast<std::ptrdiff_t>(lookup.at(e));
    }
  }

  for (std::size_t a = 0; a < exponents_.size(); ++a) {
    for (std::size_t b = 0; b < exponents_.size(); ++b) {
      if (degrees_[a] + degrees_[b] > order_) continue;
      auto e = exponents_[a];
      for (int v = 0; v < vars_; ++v) e[v] += exponents_[b][v];
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(lookup.at(e))});
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int vars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{vars, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(vars, order);
  return slot;
}

std::ptrdiff_t JetSpace::index_of(std::span<const int> exponent) const {
  if (static_cast<int>(exponent.size()) != vars_) return -1;
  std::size_t index = 0;
  for (int v = 0; v < vars_; ++v) {
    for (int k = 0; k < exponent[v]; ++k) {
      const auto next = raise(index, v);
      if (next < 0) return -1;
      index = static_cast<std::size_t>(next);
    }
  }
  return static_cast<std::ptrdiff_t>(index);
}

Jet::Jet(std::shared_ptr<const JetSpace> space, double constant)
    : space_(std::move(space)), coeffs_(space_->size(), 0.0) {
  coeffs_[0] = constant;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int var, double base) {
  Jet out(std::move(space), base);
  if (out.order() > 0) out.coeffs_[out.space_->raise(0, var)] = 1.0;
  return out;
}

Jet Jet::derivative(int var) const {
  if (order() == 0) throw InvalidArgument("cannot differentiate an order-0 jet");
  Jet out(JetSpace::get(space_->vars(), order() - 1));
  for (std::size_t i = 0; i < out.coeffs_.size(); ++i) {
    const auto up = space_->raise(i, var);
    out.coeffs_[i] = (space_->exponents(i)[var] + 1) * coeffs_[up];
  }
  return out;
}

Jet Jet::truncated(int new_order) const {
  if (new_order > order()) throw InvalidArgument("truncation cannot raise jet order");
  Jet out(JetSpace::get(space_->vars(), new_order));
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

double Jet::directional(const Eigen::VectorXd& direction, int k) const {
  if (k < 0 || k > order()) throw InvalidArgument("directional derivative beyond jet order");
  if (k == 0) return coeffs_[0];
  double sum = 0.0;
  for (std::size_t i = space_->size_upto(k - 1); i < space_->size_upto(k); ++i) {
    double term = coeffs_[i];
    for (int v = 0; v < space_->vars(); ++v) {
      term *= std::pow(direction[v], space_->exponents(i)[v]);
    }
    sum += term;
  }
  double factorial = 1.0;
  for (int j = 2; j <= k; ++j) factorial *= j;
  return factorial * sum;
}

Eigen::VectorXd Jet::gradient() const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(space_->vars());
  if (order() == 0) throw InvalidArgument("gradient needs a jet of order >= 1");
  for (int v = 0; v < space_->vars(); ++v) g[v] = coeffs_[space_->raise(0, v)];
  return g;
}

double Jet::max_abs_coeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

Jet& Jet::operator+=(const Jet& rhs) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double rhs) {
  for (double& c : coeffs_) c *= rhs;
  return *this;
}

Jet operator*(const Jet& lhs, const Jet& rhs) {
  Jet out(lhs.space_);
  for (const auto& t : lhs.space_->products()) {
    out.coeffs_[t.out] += lhs.coeffs_[t.lhs] * rhs.coeffs_[t.rhs];
  }
  return out;
}

Jet operator-(Jet v) {
  for (double& c : v.coeffs_) c = -c;
  return v;
}

Jet Jet::compose(const Jet& v, std::span<const double> taylor) {
  Jet h = v;
  h.coeffs_[0] = 0.0;
  Jet out(v.space_, taylor.back());
  for (int k = static_cast<int>(taylor.size()) - 2; k >= 0; --k) {
    out = out * h;
    out.coeffs_[0] += taylor[k];
  }
  return out;
}

Jet sin(const Jet& v) {
  const int d = v.order();
  const double s = std::sin(v.value());
  const double c = std::cos(v.value());
  std::vector<double> taylor(d + 1);
  double factorial = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) factorial *= k;
    const double deriv = (k % 4 == 0) ? s : (k % 4 == 1) ? c : (k % 4 == 2) ? -s : -c;
    taylor[k] = deriv / factorial;
  }
  return Jet::compose(v, taylor);
}

Jet cos(const Jet& v) {
  const int d = v.order();
  const double s = std::sin(v.value());
  const double c = std::cos(v.value());
  std::vector<double> taylor(d + 1);
  double factorial = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) factorial *= k;
    const double deriv = (k % 4 == 0) ? c : (k % 4 == 1) ? -s : (k % 4 == 2) ? -c : s;
    taylor[k] = deriv / factorial;
  }
  return Jet::compose(v, taylor);
}

Jet exp(const Jet& v) {
  const int d = v.order();
  const double e = std::exp(v.value());
  std::vector<double> taylor(d + 1);
  double factorial = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) factorial *= k;
    taylor[k] = e / factorial;
  }
  return Jet::compose(v, taylor);
}

Jet reciprocal(const Jet& v) {
  const int d = v.order();
  const double a = v.value();
  std::vector<double> taylor(d + 1);
  double p = 1.0 / a;
  for (int k = 0; k <= d; ++k) {
    taylor[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p /= a;
  }
  return Jet::compose(v, taylor);
}

Jet operator/(const Jet& lhs, const Jet& rhs) { return lhs * reciprocal(rhs); }

Jet powi(const Jet& v, int exponent) {
  if (exponent < 0) return reciprocal(powi(v, -exponent));
  Jet result(v.space_, 1.0);
  Jet base = v;
  // Square-and-multiply.
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

std::vector<Jet> coordinate_jets(const Eigen::VectorXd& x0, int order) {
  const auto space = JetSpace::get(static_cast<int>(x0.size()), order);
  std::vector<Jet> out;
  out.reserve(x0.size());
  for (int v = 0; v < x0.size(); ++v) out.push_back(Jet::variable(space, v, x0[v]));
  return out;
}

}  // namespace sdstab
