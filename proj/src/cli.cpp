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

#include "sdstab/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sdstab/errors.hpp"
#include "sdstab/liecalc.hpp"
#include "sdstab/sampling.hpp"
#include "sdstab/synth.hpp"

namespace sdstab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string format_vector(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_number(v[i]);
  }
  return s + ")";
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) s += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) s += ", ";
      s += format_number(m(r, c));
    }
  }
  return s + "]";
}

void print_result(std::ostream& out, std::size_t checks, std::size_t failures) {
  out << "RESULT " << (failures == 0 ? "pass" : "fail") << ' ' << checks << ' ' << failures << '\n';
}

// --- registry -------------------------------------------------------------

PieceSpec make_piece(const std::string& v, const std::string& region, const std::vector<std::string>& vars,
                     double half_width = 3.0) {
  const auto n = static_cast<Eigen::Index>(vars.size());
  return PieceSpec{v,
                   region,
                   parse_scalar_field(v, vars),
                   parse_predicate(region, vars),
                   Eigen::VectorXd::Constant(n, -half_width),
                   Eigen::VectorXd::Constant(n, half_width)};
}

StateLinearSystem double_integrator_matrices() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 0, 0;
  Eigen::MatrixXd b(2, 1);
  b << 0, 1;
  return StateLinearSystem::constant(a, b);
}

// --- YAML helpers -----------------------------------------------------------

void require_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) throw InvalidArgument(where + " must be a map");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + key + "' in " + where);
  }
}

double as_double(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw InvalidArgument(what + " must be a number");
  }
}

Eigen::VectorXd as_vector(const YAML::Node& n, const std::string& what) {
  if (n.IsScalar()) return Eigen::VectorXd::Constant(1, as_double(n, what));
  if (!n.IsSequence()) throw InvalidArgument(what + " must be a list of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_double(n[i], what);
  return v;
}

std::vector<Eigen::VectorXd> as_points(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw InvalidArgument(what + " must be a list of points");
  std::vector<Eigen::VectorXd> pts;
  for (const auto& p : n) pts.push_back(as_vector(p, what));
  return pts;
}

std::vector<std::string> as_strings(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw InvalidArgument(what + " must be a list");
  std::vector<std::string> out;
  for (const auto& s : n) out.push_back(s.as<std::string>());
  return out;
}

std::vector<std::vector<Expr>> as_expr_matrix(const YAML::Node& n, const std::vector<std::string>& vars,
                                              const std::string& what) {
  if (!n.IsSequence()) throw InvalidArgument(what + " must be a list of rows");
  std::vector<std::vector<Expr>> rows;
  for (const auto& row : n) {
    std::vector<Expr> r;
    for (const auto& s : as_strings(row, what)) r.push_back(parse_expression(s, vars));
    rows.push_back(std::move(r));
  }
  return rows;
}

ClassK as_class_k(const YAML::Node& n, const std::string& what) {
  require_keys(n, {"coef", "exponent"}, what);
  const double coef = n["coef"] ? as_double(n["coef"], what) : 1.0;
  const double exponent = n["exponent"] ? as_double(n["exponent"], what) : 2.0;
  return ClassK::power(coef, exponent);
}

PieceSpec parse_piece(const YAML::Node& n, const std::vector<std::string>& vars) {
  require_keys(n, {"V", "region", "box", "omega1", "omega2"}, "piece");
  if (!n["V"] || !n["region"]) throw InvalidArgument("piece needs V and region");
  PieceSpec p = make_piece(n["V"].as<std::string>(), n["region"].as<std::string>(), vars);
  if (const auto box = n["box"]) {
    if (box.IsScalar()) {
      const double h = as_double(box, "box");
      p.lo.setConstant(-h);
      p.hi.setConstant(h);
    } else {
      require_keys(box, {"lo", "hi"}, "box");
      p.lo = as_vector(box["lo"], "box.lo");
      p.hi = as_vector(box["hi"], "box.hi");
    }
  }
  if (n["omega1"]) p.omega1 = as_class_k(n["omega1"], "omega1");
  if (n["omega2"]) p.omega2 = as_class_k(n["omega2"], "omega2");
  return p;
}

SystemSpec parse_system(const YAML::Node& n) {
  if (n.IsScalar()) return registry_system(n.as<std::string>());
  require_keys(n, {"name", "variables", "A", "B", "drift", "input", "pieces"}, "system");
  SystemSpec s;
  if (n["name"]) {
    s = registry_system(n["name"].as<std::string>());
  } else {
    s.name = "inline";
    if (!n["variables"]) throw InvalidArgument("inline system needs variables");
  }
  if (n["variables"]) {
    const auto vars = as_strings(n["variables"], "variables");
    if (n["name"] && vars != s.variables) throw InvalidArgument("registry system variables cannot be renamed");
    s.variables = vars;
  }
  if (n["A"] || n["B"]) {
    if (!n["A"] || !n["B"]) throw InvalidArgument("state-linear system needs both A and B");
    const auto b = as_expr_matrix(n["B"], s.variables, "B");
    s.state_linear = StateLinearSystem::from_expressions(as_expr_matrix(n["A"], s.variables, "A"), b);
    s.input_dim = s.state_linear->input_dim();
    s.affine.reset();
  }
  if (n["drift"] || n["input"]) {
    if (!n["drift"] || !n["input"]) throw InvalidArgument("affine system needs drift and input");
    s.affine = AffineSystem(parse_vector_field(as_strings(n["drift"], "drift"), s.variables),
                            parse_vector_field(as_strings(n["input"], "input"), s.variables));
    if (!n["A"]) s.state_linear.reset();
    s.input_dim = 1;
  }
  if (n["pieces"]) {
    // The integrator regions are paired with the built-in pieces.
    s.integrator.reset();
    s.pieces.clear();
    for (const auto& p : n["pieces"]) s.pieces.push_back(parse_piece(p, s.variables));
  }
  if (s.state_linear && s.state_linear->state_dim() != s.state_dim()) {
    throw InvalidArgument("A has the wrong number of rows for the variables");
  }
  for (const auto& p : s.pieces) {
    if (p.lo.size() != s.state_dim() || p.hi.size() != s.state_dim()) throw InvalidArgument("piece box dimension");
  }
  return s;
}

}  // namespace

GeneralSystem SystemSpec::plant() const {
  if (state_linear) return state_linear_as_general(*state_linear);
  if (affine) return affine_as_general(*affine);
  throw InvalidArgument("system '" + name + "' has no dynamics");
}

std::vector<std::string> registry_names() {
  return {"double-integrator", "scalar-unstable", "statedep-2d", "patchwork-halfplanes"};
}

SystemSpec registry_system(const std::string& name) {
  SystemSpec s;
  s.name = name;
  if (name == "double-integrator") {
    s.variables = {"x", "y"};
    s.state_linear = double_integrator_matrices();
    s.affine = AffineSystem(parse_vector_field(std::vector<std::string>{"y", "0"}, s.variables),
                            parse_vector_field(std::vector<std::string>{"0", "1"}, s.variables));
    const std::vector<std::string> x_only = {"x"};
    s.integrator = IntegratorForm{VectorField(std::vector<Expr>{parse_expression("y", s.variables)}, 2),
                                  parse_scalar_field("x^2/2", x_only), parse_scalar_field("y^2/2", s.variables)};
    s.pieces = {make_piece("x^2/2", "x*y <= 0 && x != 0", s.variables),
                make_piece("(x^2 + y^2)/2", "y != 0", s.variables)};
  } else if (name == "scalar-unstable") {
    s.variables = {"x1"};
    s.state_linear = StateLinearSystem::constant(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
    s.affine = AffineSystem(parse_vector_field(std::vector<std::string>{"x1"}, s.variables),
                            parse_vector_field(std::vector<std::string>{"1"}, s.variables));
    s.pieces = {make_piece("x1^2/2", "x1 != 0", s.variables)};
  } else if (name == "statedep-2d") {
    s.variables = {"x1", "x2"};
    auto e = [&](const char* t) { return parse_expression(t, s.variables); };
    s.state_linear = StateLinearSystem::from_expressions({{e("0"), e("1")}, {e("sin(x1)"), e("x2^2")}},
                                                         {{e("0")}, {e("1")}});
  } else if (name == "patchwork-halfplanes") {
    s.variables = {"x1", "x2"};
    s.state_linear = double_integrator_matrices();
    s.pieces = {make_piece("x1^2 + x2^2", "x1 > 0", s.variables), make_piece("x1^2 + x2^2", "x1 < 0", s.variables)};
  } else {
    std::string known;
    for (const auto& n : registry_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown system '" + name + "' (known: " + known + ")");
  }
  if (s.state_linear) s.input_dim = s.state_linear->input_dim();
  return s;
}

SamplingPartition ExperimentConfig::partition() const {
  if (partition_prefix.empty()) return make_uniform_partition(partition_h, partition_count);
  return SamplingPartition(partition_prefix, partition_h);
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("config is not valid YAML: ") + e.what());
  }
  require_keys(root, {"system", "controller", "partition", "initial_states", "horizon", "integrator", "certificate",
                      "synthesize", "check_lie", "patchwork", "seed", "outputs"},
               "config");
  if (!root["system"]) throw InvalidArgument("config needs a system");

  ExperimentConfig c;
  try {
    c.system = parse_system(root["system"]);
    const int n = c.system.state_dim();
    if (root["controller"]) c.controller = root["controller"].as<std::string>();
    if (!c.system.state_linear && (c.controller == "frozen-gain" || c.controller == "frozen-gain-zoh")) {
      c.controller = "zero";
    }
    if (const auto p = root["partition"]) {
      require_keys(p, {"h", "count", "prefix"}, "partition");
      if (p["h"]) c.partition_h = as_double(p["h"], "partition.h");
      if (p["count"]) c.partition_count = p["count"].as<int>();
      if (p["prefix"]) {
        const Eigen::VectorXd v = as_vector(p["prefix"], "partition.prefix");
        c.partition_prefix.assign(v.data(), v.data() + v.size());
      }
    }
    if (root["initial_states"]) c.initial_states = as_points(root["initial_states"], "initial_states");
    if (root["horizon"]) c.horizon = as_double(root["horizon"], "horizon");
    if (const auto i = root["integrator"]) {
      require_keys(i, {"step", "blowup_norm"}, "integrator");
      if (i["step"]) c.integrator.step = as_double(i["step"], "integrator.step");
      if (i["blowup_norm"]) c.integrator.blowup_norm = as_double(i["blowup_norm"], "integrator.blowup_norm");
    }
    if (const auto k = root["certificate"]) {
      require_keys(k, {"function", "slope", "final_threshold"}, "certificate");
      if (k["function"]) c.certificate_function = k["function"].as<std::string>();
      if (k["slope"]) c.certificate_slope = as_double(k["slope"], "certificate.slope");
      if (k["final_threshold"]) c.final_threshold = as_double(k["final_threshold"], "certificate.final_threshold");
    }
    if (const auto s = root["synthesize"]) {
      require_keys(s, {"points", "radius", "samples"}, "synthesize");
      if (s["points"]) c.synth_points = as_points(s["points"], "synthesize.points");
      if (s["radius"]) c.synth_radius = as_double(s["radius"], "synthesize.radius");
      if (s["samples"]) c.synth_samples = s["samples"].as<int>();
    }
    c.grid_lo = Eigen::VectorXd::Constant(n, -2.0);
    c.grid_hi = Eigen::VectorXd::Constant(n, 2.0);
    if (const auto g = root["check_lie"]) {
      require_keys(g, {"lo", "hi", "points", "max_order"}, "check_lie");
      if (g["lo"]) c.grid_lo = as_vector(g["lo"], "check_lie.lo");
      if (g["hi"]) c.grid_hi = as_vector(g["hi"], "check_lie.hi");
      if (g["points"]) c.grid_points = g["points"].as<int>();
      if (g["max_order"]) c.max_order = g["max_order"].as<int>();
    }
    if (const auto p = root["patchwork"]) {
      require_keys(p, {"offsets", "samples", "boundary_pairs", "radius", "perturbation"}, "patchwork");
      if (p["offsets"]) {
        const Eigen::VectorXd v = as_vector(p["offsets"], "patchwork.offsets");
        c.offsets.assign(v.data(), v.data() + v.size());
      }
      if (p["samples"]) c.verify.samples = p["samples"].as<int>();
      if (p["boundary_pairs"]) c.verify.boundary_pairs = p["boundary_pairs"].as<int>();
      if (p["radius"]) c.verify.radius = as_double(p["radius"], "patchwork.radius");
      if (p["perturbation"]) c.verify.perturbation = as_double(p["perturbation"], "patchwork.perturbation");
    }
    if (root["seed"]) c.seed = root["seed"].as<std::uint64_t>();
    if (const auto o = root["outputs"]) {
      require_keys(o, {"dir", "prefix"}, "outputs");
      if (o["dir"]) c.output_dir = o["dir"].as<std::string>();
      if (o["prefix"]) c.output_prefix = o["prefix"].as<std::string>();
    }
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }

  const int n = c.system.state_dim();
  static const std::set<std::string> kControllers = {"zero", "frozen-gain", "frozen-gain-zoh", "patchwork"};
  if (!kControllers.count(c.controller)) throw InvalidArgument("unknown controller '" + c.controller + "'");
  if (!(c.partition_h > 0.0)) throw InvalidArgument("partition.h must be positive");
  if (c.partition_count < 1) throw InvalidArgument("partition.count must be >= 1");
  if (!(c.horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  c.integrator.validate();
  for (const auto& x : c.initial_states) {
    if (x.size() != n) throw InvalidArgument("initial state dimension does not match the system");
  }
  for (const auto& x : c.synth_points) {
    if (x.size() != n) throw InvalidArgument("synthesize point dimension does not match the system");
  }
  if (!(c.certificate_slope >= 1.0)) throw InvalidArgument("certificate.slope must be >= 1");
  if (!(c.final_threshold > 0.0)) throw InvalidArgument("certificate.final_threshold must be positive");
  if (!(c.synth_radius > 0.0) || c.synth_samples < 1) throw InvalidArgument("synthesize radius/samples out of range");
  if (c.grid_lo.size() != n || c.grid_hi.size() != n) throw InvalidArgument("check_lie box dimension");
  if (c.grid_points < 2 || c.max_order < 1 || c.max_order > kMaxConditionOrder) {
    throw InvalidArgument("check_lie points must be >= 2 and max_order in [1, 4]");
  }
  if (c.verify.samples < 1 || c.verify.boundary_pairs < 1 || !(c.verify.radius > 0.0) ||
      !(c.verify.perturbation > 0.0)) {
    throw InvalidArgument("patchwork sample counts and sizes must be positive");
  }
  if (c.certificate_function != "quadratic" && c.certificate_function != "W") {
    parse_scalar_field(c.certificate_function, c.system.variables);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

ExperimentConfig apply_options(ExperimentConfig c, const CommandOptions& opt) {
  if (opt.seed) c.seed = *opt.seed;
  if (opt.out_dir) c.output_dir = *opt.out_dir;
  c.verify.seed = c.seed;
  return c;
}

std::vector<LyapunovPiece> lyapunov_pieces(const SystemSpec& s) {
  if (s.pieces.empty()) throw InvalidArgument("system '" + s.name + "' has no Lyapunov pieces");
  std::vector<LyapunovPiece> out;
  for (const auto& p : s.pieces) out.emplace_back(p.v, Region(p.region, p.lo, p.hi), p.omega1, p.omega2);
  return out;
}

struct BuiltPatchwork {
  PatchworkW w;
  std::optional<OffsetChoice> choice;
};

BuiltPatchwork build_patchwork(const ExperimentConfig& c) {
  auto pieces = lyapunov_pieces(c.system);
  if (!c.offsets.empty()) {
    if (c.offsets.size() != pieces.size()) throw InvalidArgument("one offset per piece required");
    return {PatchworkW(PatchworkFamily(std::move(pieces), c.offsets)), std::nullopt};
  }
  OffsetChoice choice = choose_offsets(pieces, c.verify.boundary_pairs, c.verify.radius, c.seed);
  return {PatchworkW(PatchworkFamily(std::move(pieces), choice.offsets)), choice};
}

}  // namespace

std::string trajectory_csv(const ClosedLoopRun& run, const IntervalFunction& v, const PatchworkW* w) {
  const auto& states = run.trajectory.states;
  const int n = static_cast<int>(states.front().size());
  const int m = static_cast<int>(run.inputs.front().size());
  std::string s = "t";
  for (int i = 1; i <= n; ++i) s += ",x" + std::to_string(i);
  for (int i = 1; i <= m; ++i) s += ",u" + std::to_string(i);
  s += ",V";
  if (w) s += ",W";
  s += '\n';

  auto row = [&](std::size_t i, std::optional<std::size_t> k) {
    s += format_number(run.trajectory.times[i]);
    for (int j = 0; j < n; ++j) s += ',' + format_number(states[i][j]);
    for (int j = 0; j < m; ++j) s += ',' + format_number(run.inputs[i][j]);
    s += ',' + (k ? format_number(v(run, *k, states[i])) : std::string("nan"));
    if (w) {
      double wv = std::nan("");
      if (states[i].allFinite()) {
        try {
          wv = (*w)(states[i]);
        } catch (const UncoveredPoint&) {
        }
      }
      s += ',' + format_number(wv);
    }
    s += '\n';
  };
  // A junction point belongs to the interval that starts there.
  for (std::size_t k = 0; k < run.intervals.size(); ++k) {
    for (std::size_t i = run.intervals[k].first; i < run.intervals[k].last; ++i) row(i, k);
  }
  if (run.intervals.empty()) {
    row(0, std::nullopt);
  } else {
    row(run.intervals.back().last, run.intervals.size() - 1);
  }
  return s;
}

std::string certificate_csv(const DecreaseCertificate& cert) {
  std::string s = "k,T_k,V_start,V_end,L_k,Vmax,bound_ok,C_k\n";
  for (const auto& ic : cert.intervals) {
    s += std::to_string(ic.k + 1) + ',' + format_number(ic.t_start) + ',' + format_number(ic.v_start) + ',' +
         format_number(ic.v_end) + ',' + format_number(ic.margin) + ',' + format_number(ic.v_max) + ',' +
         (ic.bound_ok ? "1" : "0") + ',' + format_number(ic.excursion_ratio) + '\n';
  }
  return s;
}

int cmd_synthesize(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const ExperimentConfig c = apply_options(cfg, opt);
  if (!c.system.state_linear) throw InvalidArgument("synthesize needs a state-linear system (A, B)");
  const auto& sys = *c.system.state_linear;
  const int n = c.system.state_dim();

  std::vector<Eigen::VectorXd> points = c.synth_points;
  if (points.empty()) {
    points.push_back(Eigen::VectorXd::Zero(n));
    for (auto& p : ball_samples(n, c.synth_radius, c.synth_samples, c.seed)) points.push_back(std::move(p));
  }
  out << "synthesize " << c.system.name << ": " << points.size() << " points\n";
  std::size_t checks = 0;
  std::size_t failures = 0;
  for (const auto& xi : points) {
    ++checks;
    try {
      const auto r = synthesize_gain(sys.a(xi), sys.b(xi));
      if (!opt.quiet) {
        out << "xi=" << format_vector(xi) << " F=" << format_matrix(r.gain) << " P=" << format_matrix(r.lyapunov)
            << " k=" << format_number(r.decay) << " abscissa=" << format_number(r.abscissa) << '\n';
      }
    } catch (const NotStabilizable& e) {
      ++failures;
      out << "not stabilizable at xi=" << format_vector(xi) << ": " << e.what() << '\n';
    }
  }
  if (failures == 0 && c.synth_points.empty()) {
    ++checks;
    const auto b = uniform_bounds([&sys](const Eigen::VectorXd& xi) {
      return synthesize_gain(sys.a(xi), sys.b(xi)).lyapunov;
    }, n, c.synth_radius, c.synth_samples, c.seed);
    out << "uniform bounds on B[0, " << format_number(b.radius) << "]: c_low=" << format_number(b.c_low)
        << " c_high=" << format_number(b.c_high) << '\n';
  }
  print_result(out, checks, failures);
  return failures == 0 ? kExitPass : kExitFail;
}

int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const ExperimentConfig c = apply_options(cfg, opt);
  if (c.initial_states.empty()) throw InvalidArgument("simulate needs initial_states");
  const GeneralSystem plant = c.system.plant();

  std::optional<PatchworkW> w;
  if (c.controller == "patchwork" || c.certificate_function == "W") w = build_patchwork(c).w;

  std::optional<SampledController> ctrl;
  if (c.controller == "zero") {
    ctrl = zero_controller(plant.input_dim());
  } else if (c.controller == "patchwork") {
    if (!c.system.state_linear) throw InvalidArgument("patchwork controller needs a state-linear system");
    std::vector<SampledController> pieces(c.system.pieces.size(),
                                          frozen_gain_controller(*c.system.state_linear, c.integrator));
    ctrl = patchwork_controller(*w, std::move(pieces));
  } else {
    ctrl = frozen_gain_controller(*c.system.state_linear, c.integrator, c.controller == "frozen-gain-zoh");
  }

  IntervalFunction v;
  if (c.certificate_function == "quadratic") {
    v = per_sample_quadratic();
  } else if (c.certificate_function == "W") {
    v = fixed_function([w](const Eigen::VectorXd& x) { return (*w)(x); });
  } else {
    v = fixed_function(parse_scalar_field(c.certificate_function, c.system.variables));
  }
  const ClassK a = ClassK::linear(c.certificate_slope);

  std::filesystem::create_directories(c.output_dir);
  out << "simulate " << c.system.name << " controller=" << c.controller << " horizon=" << format_number(c.horizon)
      << '\n';
  std::size_t checks = 0;
  std::size_t failures = 0;
  for (std::size_t r = 0; r < c.initial_states.size(); ++r) {
    const auto run = run_closed_loop(plant, *ctrl, c.partition(), StateVector(c.initial_states[r]), c.horizon,
                                     c.integrator);
    const std::string stem = (std::filesystem::path(c.output_dir) / (c.output_prefix + "_" + std::to_string(r))).string();
    {
      std::ofstream f(stem + "_trajectory.csv", std::ios::binary);
      f << trajectory_csv(run, v, w ? &*w : nullptr);
    }
    out << "run " << r << " x0=" << format_vector(c.initial_states[r]);
    checks += 2;
    if (run.intervals.empty()) {
      failures += 2;
      out << " aborted before the first interval: " << run.abort_reason.value_or("") << '\n';
      continue;
    }
    const auto cert = certify_decrease(run, v, a);
    {
      std::ofstream f(stem + "_certificate.csv", std::ios::binary);
      f << certificate_csv(cert);
    }
    double c_max = 0.0;
    for (const auto& ic : cert.intervals) c_max = std::max(c_max, ic.excursion_ratio);
    const double final_norm = run.trajectory.final_state().norm();
    const bool settled = !run.escaped && final_norm <= c.final_threshold;
    out << " intervals=" << cert.intervals.size() << " final|x|=" << format_number(final_norm)
        << " min_L=" << format_number(cert.uniform_margin) << " max_C=" << format_number(c_max)
        << " marginal=" << cert.marginal_count << '\n';
    if (run.escaped) out << "  escaped at t=" << format_number(run.trajectory.escape_time) << '\n';
    if (run.abort_reason) {
      out << "  controller error: " << *run.abort_reason << " at " << format_vector(*run.abort_witness) << '\n';
    }
    out << "  decrease certificate: " << (cert.passed ? "pass" : "fail");
    if (!cert.passed) {
      out << " (" << cert.failures << " failing intervals";
      for (const auto& ic : cert.intervals) {
        if (!ic.passed) {
          out << ", first at T_k=" << format_number(ic.t_start) << " L_k=" << format_number(ic.margin)
              << " bound_ok=" << ic.bound_ok;
          break;
        }
      }
      out << ")";
    }
    out << '\n' << "  final state below " << format_number(c.final_threshold) << ": " << (settled ? "pass" : "fail")
        << '\n';
    if (!cert.passed) ++failures;
    if (!settled) ++failures;
  }
  print_result(out, checks, failures);
  return failures == 0 ? kExitPass : kExitFail;
}

int cmd_check_lie(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const ExperimentConfig c = apply_options(cfg, opt);
  const SystemSpec& s = c.system;
  if (!s.affine) throw InvalidArgument("check-lie needs an input-affine system (drift, input)");
  if (s.pieces.empty()) throw InvalidArgument("check-lie needs at least one Lyapunov piece");
  const int n = s.state_dim();
  const double radius = std::max(c.grid_lo.cwiseAbs().maxCoeff(), c.grid_hi.cwiseAbs().maxCoeff()) * std::sqrt(n);
  for (const auto& p : s.pieces) require_lyapunov_candidate(p.v, &p.region, radius, 2000, c.seed);

  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    total *= static_cast<std::size_t>(c.grid_points);
    if (total > 2000000) throw InvalidArgument("check-lie grid is too large");
  }

  out << "check-lie " << s.name << ": " << c.grid_points << " points per axis\n";
  std::map<std::string, std::size_t> tally;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t uncovered = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Eigen::VectorXd p(n);
    std::size_t rem = idx;
    for (int i = 0; i < n; ++i) {
      const auto j = static_cast<double>(rem % static_cast<std::size_t>(c.grid_points));
      rem /= static_cast<std::size_t>(c.grid_points);
      p[i] = c.grid_lo[i] + (c.grid_hi[i] - c.grid_lo[i]) * j / (c.grid_points - 1);
    }
    if (p.isZero(0.0)) continue;
    int piece = -1;
    for (std::size_t i = 0; i < s.pieces.size() && piece < 0; ++i) {
      if (s.pieces[i].region.holds(p)) piece = static_cast<int>(i);
    }
    if (piece < 0) {
      ++uncovered;
      continue;
    }
    const auto r = check_affine_point(*s.affine, s.pieces[static_cast<std::size_t>(piece)].v, p, c.max_order);
    ++checks;
    const std::string affine_name(clause_name(r.classification));
    ++tally["affine " + affine_name];
    if (!r.passed()) ++failures;
    std::string line = "x=" + format_vector(p) + " piece=" + std::to_string(piece + 1) + " " + affine_name;
    if (r.classification != Clause::kInputNonzero && r.classification != Clause::kDriftDecrease) {
      line += " n=" + std::to_string(r.n_used);
    }
    for (const auto& wit : r.witnesses) line += " " + wit.label + "=" + format_number(wit.value);

    if (s.integrator) {
      const auto region = piece == 0 ? IntegratorRegion::kFirst : IntegratorRegion::kSecond;
      const auto q = check_integrator_point(s.integrator->big_f, s.integrator->v, s.integrator->w, region, p);
      ++checks;
      const std::string integ_name(clause_name(q.classification));
      ++tally["integrator " + integ_name];
      if (!q.passed()) ++failures;
      line += " | " + integ_name;
      for (const auto& wit : q.witnesses) line += " " + wit.label + "=" + format_number(wit.value);
    }
    if (!opt.quiet || !r.passed()) out << line << '\n';
  }
  for (const auto& [name, count] : tally) out << "count " << name << ": " << count << '\n';
  if (uncovered) out << "points outside every piece region: " << uncovered << '\n';
  print_result(out, checks, failures);
  return failures == 0 ? kExitPass : kExitFail;
}

int cmd_check_patchwork(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const ExperimentConfig c = apply_options(cfg, opt);
  out << "check-patchwork " << c.system.name << ": " << c.system.pieces.size() << " pieces\n";
  std::optional<BuiltPatchwork> built;
  try {
    built = build_patchwork(c);
  } catch (const OffsetSelectionFailure& e) {
    out << "offset selection failed: " << e.what() << " at " << format_vector(e.witness()) << '\n';
    print_result(out, 1, 1);
    return kExitFail;
  }
  std::string offsets;
  for (double o : built->w.family().offsets()) offsets += (offsets.empty() ? "" : ", ") + format_number(o);
  out << "offsets: " << offsets;
  if (built->choice) out << " (c0=" << format_number(built->choice->c0) << " delta=" << format_number(built->choice->delta) << ")";
  out << '\n';

  const auto report = verify_patchwork(built->w, c.verify);
  std::size_t failures = 0;
  for (const auto& chk : report.checks) {
    out << chk.name << ": " << (chk.passed ? "pass" : "FAIL") << (chk.vacuous ? " (vacuous)" : "")
        << " checked=" << chk.checked;
    if (chk.witness) out << " witness=" << format_vector(*chk.witness);
    if (!chk.detail.empty()) out << " " << chk.detail;
    out << '\n';
    if (!chk.passed) ++failures;
  }
  print_result(out, report.checks.size(), failures);
  return failures == 0 ? kExitPass : kExitFail;
}

int run_command(const std::string& command, const std::string& config_path, const CommandOptions& opt,
                std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (command == "synthesize") return cmd_synthesize(cfg, opt, out);
    if (command == "simulate") return cmd_simulate(cfg, opt, out);
    if (command == "check-lie") return cmd_check_lie(cfg, opt, out);
    if (command == "check-patchwork") return cmd_check_patchwork(cfg, opt, out);
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "configuration error: " << e.what() << " (at offset " << e.position() << ")\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionViolation& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const WitnessedError& e) {
    err << "failure: " << e.what() << " at " << format_vector(e.witness()) << '\n';
    out << "RESULT fail 1 1\n";
    return kExitFail;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace sdstab
