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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdstab/fields.hpp"
#include "sdstab/odeint.hpp"
#include "sdstab/patchwork.hpp"
#include "sdstab/sdfctl.hpp"
#include "sdstab/sysmodel.hpp"

namespace sdstab {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Region-local Lyapunov piece as written in a config.
struct PieceSpec {
  std::string v_text;
  std::string region_text;
  ScalarField v;
  Predicate region;
  /// Bounding box of the region, used by patchwork runs.
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  ClassK omega1 = ClassK::power(1.0, 2.0);
  ClassK omega2 = ClassK::power(1.0, 2.0);
};

/// x' = F(x, y), y' = u with Lyapunov data V on x and W on (x, y).
struct IntegratorForm {
  VectorField big_f;
  ScalarField v;
  ScalarField w;
};

struct SystemSpec {
  std::string name;
  std::vector<std::string> variables;
  int input_dim = 1;
  std::optional<StateLinearSystem> state_linear;
  std::optional<AffineSystem> affine;
  std::optional<IntegratorForm> integrator;
  std::vector<PieceSpec> pieces;

  int state_dim() const { return static_cast<int>(variables.size()); }
  /// Closed-loop plant; throws InvalidArgument when no dynamics are given.
  GeneralSystem plant() const;
};

/// Built-in examples: double-integrator, scalar-unstable, statedep-2d and
/// patchwork-halfplanes. Throws InvalidArgument for unknown names.
SystemSpec registry_system(const std::string& name);
std::vector<std::string> registry_names();

struct ExperimentConfig {
  SystemSpec system;

  /// zero, frozen-gain, frozen-gain-zoh or patchwork.
  std::string controller = "frozen-gain";

  double partition_h = 0.1;
  int partition_count = 1;
  /// Explicit instants; when set the uniform tail of step partition_h follows.
  std::vector<double> partition_prefix;

  std::vector<Eigen::VectorXd> initial_states;
  double horizon = 5.0;
  IntegrationConfig integrator;

  /// quadratic (per-sample V_xi), W (patchwork) or an expression in the state.
  std::string certificate_function = "quadratic";
  double certificate_slope = 2.0;
  double final_threshold = 1e-2;

  /// synthesize: explicit sample points, else `samples` points of B[0, radius].
  std::vector<Eigen::VectorXd> synth_points;
  double synth_radius = 2.0;
  int synth_samples = 200;

  /// check-lie grid: `grid_points` per axis over the box [grid_lo, grid_hi].
  Eigen::VectorXd grid_lo;
  Eigen::VectorXd grid_hi;
  int grid_points = 41;
  int max_order = 4;

  /// check-patchwork.
  std::vector<double> offsets;
  VerifyOptions verify;

  std::uint64_t seed = 0;
  std::string output_dir = "sdstab-out";
  std::string output_prefix = "run";

  SamplingPartition partition() const;
};

/// Reads a YAML config. Throws InvalidArgument (or ParseError for bad
/// expressions) on unknown names, missing fields or out-of-range values.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

struct CommandOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Each command prints a report ending in `RESULT pass|fail <checks> <failures>`
/// and returns an ExitCode.
int cmd_synthesize(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_check_lie(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_check_patchwork(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& out);

/// Loads the config, applies the options and dispatches; configuration and
/// numerical errors are mapped to their exit codes.
int run_command(const std::string& command, const std::string& config_path, const CommandOptions& opt,
                std::ostream& out, std::ostream& err);

/// CSV bodies used by cmd_simulate, exposed for tests.
std::string trajectory_csv(const ClosedLoopRun& run, const IntervalFunction& v, const PatchworkW* w);
std::string certificate_csv(const DecreaseCertificate& cert);

/// Shortest round-trip decimal rendering of a double.
std::string format_number(double x);

}  // namespace sdstab
