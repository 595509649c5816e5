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

#include "sdstab/patchwork.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdstab/errors.hpp"
#include "sdstab/sampling.hpp"

namespace sdstab {

ClassK::ClassK(std::function<double(double)> fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {
  if (!fn_) throw InvalidArgument("class-K function is empty");
}

ClassK ClassK::linear(double slope) {
  if (!(slope > 0.0)) throw InvalidArgument("class-K slope must be positive");
  std::ostringstream os;
  os << slope << "*s";
  return ClassK([slope](double s) { return slope * s; }, os.str());
}

ClassK ClassK::power(double coef, double exponent) {
  if (!(coef > 0.0) || !(exponent > 0.0)) throw InvalidArgument("class-K power needs positive coefficient and exponent");
  std::ostringstream os;
  os << coef << "*s^" << exponent;
  return ClassK([coef, exponent](double s) { return coef * std::pow(s, exponent); }, os.str());
}

Region::Region(Predicate membership, Eigen::VectorXd lo, Eigen::VectorXd hi, double tol)
    : membership_(std::move(membership)), lo_(std::move(lo)), hi_(std::move(hi)), tol_(tol) {
  if (lo_.size() < 1 || lo_.size() != hi_.size()) throw InvalidArgument("region box bounds must have equal size");
  if (!lo_.allFinite() || !hi_.allFinite() || !(lo_.array() < hi_.array()).all()) {
    throw InvalidArgument("region box must be finite with lo < hi");
  }
  if (!(tol_ > 0.0)) throw InvalidArgument("boundary tolerance must be positive");
  for (const auto& c : membership_.clauses) {
    if (c.margin.max_variable() >= dim()) throw InvalidArgument("region predicate uses a coordinate beyond the box");
  }
  if (interior(Eigen::VectorXd::Zero(dim()))) throw InvalidArgument("regions must exclude the origin");
}

double Region::min_slack(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw InvalidArgument("point dimension does not match region");
  double s = std::min((x - lo_).minCoeff(), (hi_ - x).minCoeff());
  for (const auto& c : membership_.clauses) s = std::min(s, c.slack(x));
  return s;
}

LyapunovPiece::LyapunovPiece(ScalarField v_, Region region_, ClassK omega1_, ClassK omega2_)
    : v(std::move(v_)), region(std::move(region_)), omega1(std::move(omega1_)), omega2(std::move(omega2_)) {
  if (v.vars() != region.dim()) throw InvalidArgument("piece function and region differ in dimension");
  const double v0 = v(Eigen::VectorXd::Zero(v.vars()));
  if (std::abs(v0) > 1e-12) throw InvalidArgument("Lyapunov piece must vanish at the origin");
}

PatchworkFamily::PatchworkFamily(std::vector<LyapunovPiece> pieces, std::vector<double> offsets, double inner_radius,
                                 ClassK comparison)
    : pieces_(std::move(pieces)),
      offsets_(std::move(offsets)),
      inner_radius_(inner_radius),
      comparison_(std::move(comparison)) {
  if (pieces_.empty()) throw InvalidArgument("patchwork family needs at least one piece");
  if (offsets_.size() != pieces_.size()) throw InvalidArgument("one offset per piece required");
  if (!(inner_radius_ > 0.0)) throw InvalidArgument("inner radius must be positive");
  tol_ = pieces_.front().region.tol();
  for (const auto& p : pieces_) {
    if (p.region.dim() != dim()) throw InvalidArgument("pieces live in different dimensions");
    tol_ = std::max(tol_, p.region.tol());
  }
  for (double c : offsets_) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("offsets must be positive and finite");
  }
}

double PatchworkFamily::a1(double s) const {
  double omega = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) omega = std::min(omega, p.omega1(s));
  const double c_min = *std::min_element(offsets_.begin(), offsets_.end());
  return omega + c_min * std::min(1.0, s / inner_radius_);
}

double PatchworkFamily::a2(double s) const {
  double omega = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_) omega = std::max(omega, p.omega2(s));
  const double c_max = *std::max_element(offsets_.begin(), offsets_.end());
  return omega + c_max * std::min(1.0, s / inner_radius_);
}

double PatchworkW::piece_value(int i, const Eigen::VectorXd& x) const {
  return family_.pieces().at(i).v(x) + family_.offsets().at(i);
}

int PatchworkW::interior_region(const Eigen::VectorXd& x) const {
  for (std::size_t i = 0; i < family_.size(); ++i) {
    if (family_.pieces()[i].region.interior(x)) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> PatchworkW::adjacent(const Eigen::VectorXd& x) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < family_.size(); ++i) {
    if (family_.pieces()[i].region.in_closure(x)) out.push_back(static_cast<int>(i));
  }
  return out;
}

PatchworkW::Value PatchworkW::eval(const Eigen::VectorXd& x) const {
  if (x.size() != family_.dim()) throw InvalidArgument("point dimension does not match patchwork");
  Value out;
  if (x.isZero(0.0)) return out;
  const int inside = interior_region(x);
  if (inside >= 0) {
    out.value = piece_value(inside, x);
    out.active = {inside};
    return out;
  }
  const auto adj = adjacent(x);
  if (adj.empty()) throw UncoveredPoint("point lies outside every region closure", x);
  std::vector<double> values;
  for (int j : adj) values.push_back(piece_value(j, x));
  out.value = *std::max_element(values.begin(), values.end());
  out.on_boundary = true;
  for (std::size_t k = 0; k < adj.size(); ++k) {
    if (values[k] == out.value) out.active.push_back(adj[k]);
  }
  return out;
}

ActiveIndex PatchworkW::active_index(const Eigen::VectorXd& x) const {
  const Value v = eval(x);
  if (!v.on_boundary) throw InvalidArgument("active index is only defined on region boundaries away from the origin");
  ActiveIndex out;
  out.index = v.active.back();
  for (int j : adjacent(x)) {
    if (j != out.index && std::abs(piece_value(j, x) - v.value) <= 10 * family_.tol()) {
      out.distinctness_violation = true;
    }
  }
  return out;
}

namespace {

int owner(const std::vector<LyapunovPiece>& pieces, const Eigen::VectorXd& x) {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].region.interior(x)) return static_cast<int>(i);
  }
  return -1;
}

double max_tol(const std::vector<LyapunovPiece>& pieces) {
  double t = 0.0;
  for (const auto& p : pieces) t = std::max(t, p.region.tol());
  return t;
}

// Shrinks [a, b] with owner(a) = i, owner(b) = j until it is shorter than
// stop; returns false when an intermediate point belongs to a third region.
bool bisect(const std::vector<LyapunovPiece>& pieces, Eigen::VectorXd a, Eigen::VectorXd b, int i, int j, double stop,
            Eigen::VectorXd& out) {
  while ((b - a).norm() >= stop) {
    const Eigen::VectorXd mid = 0.5 * (a + b);
    const int o = owner(pieces, mid);
    if (o == i) {
      a = mid;
    } else if (o == j) {
      b = mid;
    } else if (o < 0) {
      // Within tolerance of some boundary already.
      a = b = mid;
      break;
    } else {
      return false;
    }
  }
  out = 0.5 * (a + b);
  return pieces[i].region.in_closure(out) && pieces[j].region.in_closure(out);
}

// True when two pieces adjacent at x lie within gap of each other.
bool collides(const std::vector<LyapunovPiece>& pieces, const std::vector<double>& offsets, const Eigen::VectorXd& x,
              double gap) {
  std::vector<int> adj;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].region.in_closure(x)) adj.push_back(static_cast<int>(i));
  }
  for (std::size_t a = 0; a < adj.size(); ++a) {
    for (std::size_t b = a + 1; b < adj.size(); ++b) {
      const double wa = pieces[adj[a]].v(x) + offsets[adj[a]];
      const double wb = pieces[adj[b]].v(x) + offsets[adj[b]];
      if (!(std::abs(wa - wb) > gap)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<BoundarySample> sample_boundaries(const std::vector<LyapunovPiece>& pieces, double radius, int pairs,
                                              std::uint64_t seed) {
  if (pieces.empty()) throw InvalidArgument("no pieces to sample");
  if (!(radius > 0.0) || pairs < 0) throw InvalidArgument("boundary sampling needs radius > 0 and pairs >= 0");
  const int n = pieces.front().region.dim();
  const double stop = max_tol(pieces) / 10;
  const auto pts = ball_samples(n, radius, pairs + 1, seed);
  std::vector<BoundarySample> out;
  for (int k = 0; k < pairs; ++k) {
    const int i = owner(pieces, pts[k]);
    const int j = owner(pieces, pts[k + 1]);
    if (i < 0 || j < 0 || i == j) continue;
    Eigen::VectorXd b;
    if (!bisect(pieces, pts[k], pts[k + 1], i, j, stop, b) || b.isZero(0.0)) continue;
    out.push_back({b, i, j, pts[k], pts[k + 1]});
  }
  return out;
}

OffsetChoice choose_offsets(const std::vector<LyapunovPiece>& pieces,
                            const std::vector<Eigen::VectorXd>& boundary_points,
                            const std::vector<Eigen::VectorXd>& region_points, const ClassK& comparison) {
  if (pieces.empty()) throw InvalidArgument("no pieces to offset");
  for (const auto& x : region_points) {
    int count = 0;
    for (const auto& p : pieces) count += p.region.interior(x) ? 1 : 0;
    if (count > 1) throw InvalidArgument("regions overlap; offsets need disjoint regions");
  }
  static const double kC0[] = {1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0};
  const double gap = 10 * max_tol(pieces);
  Eigen::VectorXd last_collision = Eigen::VectorXd::Zero(pieces.front().region.dim());
  for (double c0 : kC0) {
    for (int d = 1; d <= 10; ++d) {
      const double delta = 0.1 * d;
      std::vector<double> offsets(pieces.size());
      for (std::size_t i = 0; i < pieces.size(); ++i) offsets[i] = c0 * (1.0 + static_cast<double>(i) * delta);

      bool ok = true;
      for (const auto& x : boundary_points) {
        if (collides(pieces, offsets, x, gap)) {
          last_collision = x;
          ok = false;
          break;
        }
      }
      for (std::size_t k = 0; ok && k < region_points.size(); ++k) {
        const int i = owner(pieces, region_points[k]);
        if (i < 0) continue;
        const double vi = pieces[i].v(region_points[k]);
        if (!(comparison(vi) + offsets[i] < 2 * comparison(vi + offsets[i]))) {
          last_collision = region_points[k];
          ok = false;
        }
      }
      if (ok) return {offsets, c0, delta};
    }
  }
  throw OffsetSelectionFailure("no offset schedule separates the pieces on all boundary samples", last_collision);
}

OffsetChoice choose_offsets(const std::vector<LyapunovPiece>& pieces, int boundary_samples, double radius,
                            std::uint64_t seed, const ClassK& comparison) {
  std::vector<Eigen::VectorXd> boundary;
  for (auto& s : sample_boundaries(pieces, radius, boundary_samples, seed)) boundary.push_back(std::move(s.point));
  const int n = pieces.front().region.dim();
  return choose_offsets(pieces, boundary, ball_samples(n, radius, boundary_samples, seed + 1), comparison);
}

bool PatchworkReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerificationCheck& c) { return c.passed; });
}

const VerificationCheck& PatchworkReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("no check named " + name);
}

namespace {

VerificationCheck named_check(const char* name) {
  VerificationCheck c;
  c.name = name;
  return c;
}

void fail(VerificationCheck& c, const Eigen::VectorXd& x, const std::string& detail) {
  if (!c.passed) return;
  c.passed = false;
  c.witness = x;
  c.detail = detail;
}

std::string describe(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace

PatchworkReport verify_patchwork(const PatchworkW& w, const VerifyOptions& options) {
  if (!(options.radius > 0.0) || options.samples < 1 || options.boundary_pairs < 0) {
    throw InvalidArgument("verification needs radius > 0, samples >= 1 and boundary_pairs >= 0");
  }
  const auto& family = w.family();
  const auto& pieces = family.pieces();
  const double tol = family.tol();
  const int n = family.dim();
  PatchworkReport report;

  VerificationCheck coverage = named_check("coverage");
  VerificationCheck envelopes = named_check("piece-envelopes");
  VerificationCheck sandwich = named_check("sandwich");
  const auto pts = ball_samples(n, options.radius, options.samples, options.seed);
  for (const auto& x : pts) {
    if (x.isZero(0.0)) continue;
    ++coverage.checked;
    int interiors = 0;
    for (const auto& p : pieces) interiors += p.region.interior(x) ? 1 : 0;
    if (interiors > 1) fail(coverage, x, "point lies inside two regions at " + describe(x));
    if (w.adjacent(x).empty()) {
      fail(coverage, x, "point outside every region closure at " + describe(x));
      continue;
    }
    const double r = x.norm();
    const int inside = w.interior_region(x);
    if (inside >= 0) {
      ++envelopes.checked;
      const auto& p = pieces[inside];
      const double v = p.v(x);
      const double slack = 1e-12 * (1.0 + std::abs(v));
      if (p.omega1(r) > v + slack || v > p.omega2(r) + slack) {
        fail(envelopes, x, "piece " + std::to_string(inside + 1) + " leaves its envelope at " + describe(x));
      }
    }
    const double wx = w(x);
    const double slack = 1e-12 * (1.0 + std::abs(wx));
    ++sandwich.checked;
    if (family.a1(r) > wx + slack) fail(sandwich, x, "a1(|x|) > W(x) at " + describe(x));
    if (r >= family.inner_radius() && wx > family.a2(r) + slack) {
      fail(sandwich, x, "W(x) > a2(|x|) at " + describe(x));
    }
    if (!(wx > 0.0)) fail(sandwich, x, "W(x) <= 0 at " + describe(x));
  }
  if (w(Eigen::VectorXd::Zero(n)) != 0.0) fail(sandwich, Eigen::VectorXd::Zero(n), "W(0) != 0");

  VerificationCheck distinct = named_check("distinctness");
  VerificationCheck usc = named_check("usc");
  VerificationCheck stability = named_check("active-index-stability");
  const auto boundary = sample_boundaries(pieces, options.radius, options.boundary_pairs, options.seed + 1);
  const double gap = 10 * tol;
  const double stop = tol / 10;
  HaltonSequence directions(n, options.seed + 2);
  for (const auto& b : boundary) {
    const Eigen::VectorXd& x = b.point;
    const auto adj = w.adjacent(x);
    ++distinct.checked;
    for (std::size_t i = 0; i < adj.size(); ++i) {
      for (std::size_t j = i + 1; j < adj.size(); ++j) {
        const double d = std::abs(w.piece_value(adj[i], x) - w.piece_value(adj[j], x));
        if (!(d > gap)) {
          fail(distinct, x,
               "W" + std::to_string(adj[i] + 1) + " and W" + std::to_string(adj[j] + 1) + " differ by " +
                   std::to_string(d) + " at " + describe(x));
        }
      }
    }

    // Approach x from the interior of each adjoining region along the
    // segment towards that region's anchor.
    const double wx = w(x);
    for (const auto& [region, anchor] : {std::pair{b.from, b.anchor_from}, std::pair{b.to, b.anchor_to}}) {
      const Eigen::VectorXd dir = (anchor - x).normalized();
      double prev = std::numeric_limits<double>::quiet_NaN();
      double last = prev;
      for (int k = 0; k <= 10; ++k) {
        const Eigen::VectorXd y = x + 1e-2 * std::ldexp(1.0, -k) * dir;
        if (w.interior_region(y) != region) continue;
        prev = last;
        last = w(y);
      }
      if (std::isnan(prev)) continue;
      ++usc.checked;
      const double limit = 2 * last - prev;
      if (limit > wx + gap) fail(usc, x, "limsup W(y) exceeds W(x) at " + describe(x));
    }

    // Move along the same boundary: shift both anchors and bisect again.
    if (!w.eval(x).on_boundary) continue;
    const ActiveIndex ix = w.active_index(x);
    Eigen::VectorXd u = 2 * directions.next() - Eigen::VectorXd::Ones(n);
    if (u.isZero(0.0)) continue;
    u *= options.perturbation / u.norm();
    const Eigen::VectorXd a = x + (b.anchor_from - x).normalized() * options.perturbation + u;
    const Eigen::VectorXd c = x + (b.anchor_to - x).normalized() * options.perturbation + u;
    if (owner(pieces, a) != b.from || owner(pieces, c) != b.to) continue;
    Eigen::VectorXd y;
    if (!bisect(pieces, a, c, b.from, b.to, stop, y) || y.isZero(0.0) || !w.eval(y).on_boundary) continue;
    ++stability.checked;
    const ActiveIndex iy = w.active_index(y);
    if (iy.index != ix.index) {
      fail(stability, y, "active index changes from " + std::to_string(ix.index + 1) + " to " +
                             std::to_string(iy.index + 1) + " near " + describe(x));
    } else if (w(y) != w.piece_value(ix.index, y)) {
      fail(stability, y, "W(y) differs from the active piece near " + describe(x));
    }
  }
  for (auto* c : {&distinct, &usc, &stability}) {
    if (c->checked == 0) {
      c->vacuous = true;
      c->detail = "no shared boundary points sampled";
    }
  }
  report.checks = {coverage, envelopes, sandwich, distinct, usc, stability};
  return report;
}

}  // namespace sdstab
