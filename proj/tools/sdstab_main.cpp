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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdstab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sampled-data stabilization toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool quiet = false;
  for (const char* name : {"synthesize", "simulate", "check-lie", "check-patchwork"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "YAML experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides outputs.dir)");
    sub->add_option("--seed", seed, "Seed for quasi-random sampling (overrides seed)");
    sub->add_flag("--quiet", quiet, "Only print failures and the summary");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sdstab::kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  sdstab::CommandOptions opt;
  opt.quiet = quiet;
  if (sub->count("--out")) opt.out_dir = out_dir;
  if (sub->count("--seed")) opt.seed = seed;
  return sdstab::run_command(sub->get_name(), config, opt, std::cout, std::cerr);
}
