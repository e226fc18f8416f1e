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

#ifndef SMCDIV_CLI_CONFIG_HPP
#define SMCDIV_CLI_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smcdiv::cli {

/// Invalid configuration. `line` is 1-based; 0 when no position applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& message);

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class ModelId { kLinReg, kDpm, kGrid };
enum class ReferenceMode { kExact, kApproximateMcmc };

std::string to_string(ModelId id);
/// "exact" or "approximate", as written to result rows.
std::string to_string(ReferenceMode mode);

struct LinRegSettings {
  bool intercept = true;
  double prior_variance = 1.0;
  double noise_variance = 0.25;
  /// "random-walk" or "independent".
  std::string kernel = "random-walk";
  double step_scale = 0.5;
};

struct DpmSettings {
  double concentration = 1.0;
  double base_mean = 0.0;
  double base_variance = 4.0;
  double noise_variance = 0.25;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelId model = ModelId::kLinReg;
  /// Dataset path, resolved against the config file's directory. Empty means
  /// the built-in default dataset.
  std::string data;
  /// Rows of the loaded dataset (empty for the default).
  std::vector<std::vector<double>> rows;
  LinRegSettings linreg;
  DpmSettings dpm;

  std::vector<std::size_t> particles = {1};
  /// Repetitions of the rejuvenation cycle between target updates.
  std::vector<std::size_t> rejuvenation = {1};
  std::size_t n_reference = 1000;
  std::size_t n_forward = 1000;
  std::uint64_t seed = 1;

  ReferenceMode reference = ReferenceMode::kExact;
  /// Approximate reference chain, in sweeps of the final-step cycle.
  std::size_t burn_in = 1000;
  std::size_t thin = 10;

  std::string output = "results";
  bool dump_samples = false;
  bool record_wall_time = false;
};

/// Parses and validates a YAML experiment description. `base_dir` resolves a
/// relative data path.
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::string& base_dir = ".");

ExperimentConfig load_config(const std::string& path);

}  // namespace smcdiv::cli

namespace smcdiv {
struct LinRegModel;
struct DpmModel;
}  // namespace smcdiv

namespace smcdiv::cli {

/// Model instances described by a validated config.
smcdiv::LinRegModel make_linreg(const ExperimentConfig& cfg);
smcdiv::DpmModel make_dpm(const ExperimentConfig& cfg);

}  // namespace smcdiv::cli

#endif  // SMCDIV_CLI_CONFIG_HPP
