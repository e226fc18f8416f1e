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

#ifndef SMCDIV_CLI_COMMANDS_HPP
#define SMCDIV_CLI_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "smcdiv/cli/config.hpp"
#include "smcdiv/core.hpp"

namespace smcdiv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

inline constexpr int kSchemaVersion = 1;

/// Environment variable that overrides the output directory of a config.
inline constexpr const char* kOutputDirEnv = "SMCDIV_OUTPUT_DIR";

struct ResultRow {
  std::string model;
  std::size_t particles = 0;
  std::size_t rejuvenation = 0;
  double elbo = 0.0;
  double elbo_stderr = 0.0;
  double eubo = 0.0;
  double eubo_stderr = 0.0;
  double kl_bound = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string reference_mode;
};

struct CellResult {
  ResultRow row;
  DivergenceEstimate estimate;
};

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t threads = 1;
};

/// Runs one (particles, rejuvenation) cell. The cell's streams derive from
/// (seed, cell index) only, so results do not depend on scheduling.
CellResult run_cell(const ExperimentConfig& cfg, std::size_t particles, std::size_t rejuvenation,
                    std::size_t cell_index, std::size_t threads);

/// Every (particles, rejuvenation) cell in row-major order. With
/// `concurrent_cells`, cells run in parallel and each estimator is serial.
std::vector<CellResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads,
                                       bool concurrent_cells);

std::string csv_header();
std::string csv_line(const ResultRow& row);
std::string json_line(const CellResult& cell, const ExperimentConfig& cfg, bool with_samples);

/// Output directory: --out, then the environment override, then the config.
std::string resolve_output_dir(const ExperimentConfig& cfg, const CommandOptions& options);

/// Writes the CSV table to `out` and to <output dir>/<name>.csv.
int cmd_estimate(const std::string& config_path, const CommandOptions& options, std::ostream& out,
                 std::ostream& err);

/// Writes <name>.csv and <name>.jsonl to the output directory; echoes the CSV.
int cmd_sweep(const std::string& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err);

/// Runs the validation suite and prints one line per check.
int cmd_validate(bool negative_controls, double scale, const CommandOptions& options,
                 std::ostream& out, std::ostream& err);

}  // namespace smcdiv::cli

#endif  // SMCDIV_CLI_COMMANDS_HPP
