// Copyright 2026 The smcdiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smcdiv/cli/commands.hpp"

int main(int argc, char** argv) {
  namespace cli = smcdiv::cli;
  CLI::App app{"Subjective divergence estimation for SMC samplers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t threads = 1;
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out_dir, "Output directory (overrides $SMCDIV_OUTPUT_DIR and the config)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string config;
  auto* estimate = app.add_subcommand("estimate", "Estimate bounds for every configured cell");
  estimate->add_option("config", config, "Experiment config (YAML)")->required();
  auto* sweep = app.add_subcommand("sweep", "Run the full sweep and write CSV and JSON lines");
  sweep->add_option("config", config, "Experiment config (YAML)")->required();

  bool negative_controls = false;
  double scale = 1.0;
  auto* validate = app.add_subcommand("validate", "Run the validation suite");
  validate->add_flag("--negative-controls", negative_controls,
                     "Include a deliberately broken kernel that must be caught");
  validate->add_option("--scale", scale, "Multiplier on sample counts")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfigError;
  }

  cli::CommandOptions options;
  options.seed = seed;
  options.out_dir = out_dir;
  options.threads = threads;
  if (*estimate) {
    return cli::cmd_estimate(config, options, std::cout, std::cerr);
  }
  if (*sweep) {
    return cli::cmd_sweep(config, options, std::cout, std::cerr);
  }
  return cli::cmd_validate(negative_controls, scale, options, std::cout, std::cerr);
}
