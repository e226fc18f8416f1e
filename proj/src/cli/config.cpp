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

#include "smcdiv/cli/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "smcdiv/dataset.hpp"
#include "smcdiv/error.hpp"
#include "smcdiv/models/dpm.hpp"
#include "smcdiv/models/linreg.hpp"

namespace smcdiv::cli {
namespace {

std::size_t line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? static_cast<std::size_t>(mark.line) + 1 : 0;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    throw ConfigError(source_, line_of(node), message);
  }

  void only_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                 const std::string& where) const {
    if (!map.IsMap()) {
      fail(map, where + " must be a mapping");
    }
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) {
        fail(kv.first, "unknown key '" + key + "' in " + where);
      }
    }
  }

  std::string text(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) {
      fail(node, "'" + key + "' must be a string");
    }
    return node.as<std::string>();
  }

  double real(const YAML::Node& node, const std::string& key) const {
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' must be a number");
    }
  }

  bool flag(const YAML::Node& node, const std::string& key) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' must be true or false");
    }
  }

  std::uint64_t count(const YAML::Node& node, const std::string& key, std::uint64_t minimum) const {
    long long v = 0;
    try {
      v = node.as<long long>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' must be an integer");
    }
    if (v < static_cast<long long>(minimum)) {
      fail(node, "'" + key + "' must be at least " + std::to_string(minimum) + ", got " +
                     std::to_string(v));
    }
    return static_cast<std::uint64_t>(v);
  }

  std::vector<std::size_t> counts(const YAML::Node& node, const std::string& key,
                                  std::uint64_t minimum) const {
    std::vector<std::size_t> out;
    if (node.IsScalar()) {
      out.push_back(count(node, key, minimum));
    } else if (node.IsSequence() && node.size() > 0) {
      for (const auto& item : node) {
        out.push_back(count(item, key, minimum));
      }
    } else {
      fail(node, "'" + key + "' must be an integer or a non-empty list of integers");
    }
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                                  : source + ": " + message),
      line_(line) {}

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::kLinReg:
      return "linreg";
    case ModelId::kDpm:
      return "dpm";
    case ModelId::kGrid:
      return "grid";
  }
  return "unknown";
}

std::string to_string(ReferenceMode mode) {
  return mode == ReferenceMode::kExact ? "exact" : "approximate";
}

LinRegModel make_linreg(const ExperimentConfig& cfg) {
  if (cfg.rows.empty()) {
    LinRegModel m = default_linreg_model();
    if (cfg.linreg.intercept && cfg.linreg.prior_variance == 1.0 &&
        cfg.linreg.noise_variance == 0.25) {
      return m;
    }
    std::vector<double> x(m.num_observations());
    std::vector<double> y(m.num_observations());
    for (std::size_t t = 0; t < x.size(); ++t) {
      x[t] = m.features(static_cast<Eigen::Index>(t), 1);
      y[t] = m.observations(static_cast<Eigen::Index>(t));
    }
    return LinRegModel::from_points(x, y, cfg.linreg.intercept, cfg.linreg.prior_variance,
                                    cfg.linreg.noise_variance);
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : cfg.rows) {
    x.push_back(row[0]);
    y.push_back(row[1]);
  }
  return LinRegModel::from_points(x, y, cfg.linreg.intercept, cfg.linreg.prior_variance,
                                  cfg.linreg.noise_variance);
}

DpmModel make_dpm(const ExperimentConfig& cfg) {
  DpmModel m = default_dpm_model();
  if (!cfg.rows.empty()) {
    m.observations.clear();
    for (const auto& row : cfg.rows) {
      m.observations.push_back(row[0]);
    }
  }
  m.concentration = cfg.dpm.concentration;
  m.base_mean = cfg.dpm.base_mean;
  m.base_variance = cfg.dpm.base_variance;
  m.noise_variance = cfg.dpm.noise_variance;
  m.validate();
  return m;
}

namespace {
ExperimentConfig parse_document(const std::string& text, const std::string& source,
                                const std::string& base_dir);
}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::string& base_dir) {
  try {
    return parse_document(text, source, base_dir);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0,
                      e.msg);
  }
}

namespace {
ExperimentConfig parse_document(const std::string& text, const std::string& source,
                                const std::string& base_dir) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, static_cast<std::size_t>(e.mark.line + 1), e.msg);
  }
  if (!root.IsMap()) {
    throw ConfigError(source, 0, "expected a mapping at the top level");
  }
  r.only_keys(root,
              {"name", "model", "data", "linreg", "dpm", "particles", "rejuvenation", "n_reference",
               "n_forward", "seed", "reference", "output", "dump_samples", "record_wall_time"},
              "experiment");

  ExperimentConfig cfg;
  if (!root["model"]) {
    r.fail(root, "missing required key 'model'");
  }
  const std::string model = r.text(root["model"], "model");
  if (model == "linreg") {
    cfg.model = ModelId::kLinReg;
  } else if (model == "dpm") {
    cfg.model = ModelId::kDpm;
  } else if (model == "grid") {
    cfg.model = ModelId::kGrid;
  } else {
    r.fail(root["model"], "unknown model '" + model + "' (expected linreg, dpm or grid)");
  }
  if (root["name"]) {
    cfg.name = r.text(root["name"], "name");
  }
  if (root["particles"]) {
    cfg.particles = r.counts(root["particles"], "particles", 1);
  }
  if (root["rejuvenation"]) {
    cfg.rejuvenation = r.counts(root["rejuvenation"], "rejuvenation", 0);
  }
  if (root["n_reference"]) {
    cfg.n_reference = r.count(root["n_reference"], "n_reference", 1);
  }
  if (root["n_forward"]) {
    cfg.n_forward = r.count(root["n_forward"], "n_forward", 1);
  }
  if (root["seed"]) {
    cfg.seed = r.count(root["seed"], "seed", 0);
  }
  if (root["output"]) {
    cfg.output = r.text(root["output"], "output");
  }
  if (root["dump_samples"]) {
    cfg.dump_samples = r.flag(root["dump_samples"], "dump_samples");
  }
  if (root["record_wall_time"]) {
    cfg.record_wall_time = r.flag(root["record_wall_time"], "record_wall_time");
  }

  if (const YAML::Node ref = root["reference"]) {
    YAML::Node mode = ref;
    if (ref.IsMap()) {
      r.only_keys(ref, {"mode", "burn_in", "thin"}, "reference");
      if (!ref["mode"]) {
        r.fail(ref, "missing required key 'mode' in reference");
      }
      mode.reset(ref["mode"]);
      if (ref["burn_in"]) {
        cfg.burn_in = r.count(ref["burn_in"], "burn_in", 0);
      }
      if (ref["thin"]) {
        cfg.thin = r.count(ref["thin"], "thin", 1);
      }
    }
    const std::string m = r.text(mode, "reference.mode");
    if (m == "exact") {
      cfg.reference = ReferenceMode::kExact;
    } else if (m == "approximate-mcmc") {
      cfg.reference = ReferenceMode::kApproximateMcmc;
    } else {
      r.fail(mode, "unknown reference mode '" + m + "' (expected exact or approximate-mcmc)");
    }
  }

  if (const YAML::Node lin = root["linreg"]) {
    if (cfg.model != ModelId::kLinReg) {
      r.fail(lin, "'linreg' settings given for model " + to_string(cfg.model));
    }
    r.only_keys(lin, {"intercept", "prior_variance", "noise_variance", "kernel", "step_scale"},
                "linreg");
    if (lin["intercept"]) {
      cfg.linreg.intercept = r.flag(lin["intercept"], "intercept");
    }
    if (lin["prior_variance"]) {
      cfg.linreg.prior_variance = r.real(lin["prior_variance"], "prior_variance");
    }
    if (lin["noise_variance"]) {
      cfg.linreg.noise_variance = r.real(lin["noise_variance"], "noise_variance");
    }
    if (lin["kernel"]) {
      cfg.linreg.kernel = r.text(lin["kernel"], "kernel");
      if (cfg.linreg.kernel != "random-walk" && cfg.linreg.kernel != "independent") {
        r.fail(lin["kernel"], "unknown kernel '" + cfg.linreg.kernel +
                                  "' (expected random-walk or independent)");
      }
    }
    if (lin["step_scale"]) {
      cfg.linreg.step_scale = r.real(lin["step_scale"], "step_scale");
      if (!(cfg.linreg.step_scale > 0.0)) {
        r.fail(lin["step_scale"], "'step_scale' must be positive");
      }
    }
  }
  if (const YAML::Node dpm = root["dpm"]) {
    if (cfg.model != ModelId::kDpm) {
      r.fail(dpm, "'dpm' settings given for model " + to_string(cfg.model));
    }
    r.only_keys(dpm, {"concentration", "base_mean", "base_variance", "noise_variance"}, "dpm");
    if (dpm["concentration"]) {
      cfg.dpm.concentration = r.real(dpm["concentration"], "concentration");
    }
    if (dpm["base_mean"]) {
      cfg.dpm.base_mean = r.real(dpm["base_mean"], "base_mean");
    }
    if (dpm["base_variance"]) {
      cfg.dpm.base_variance = r.real(dpm["base_variance"], "base_variance");
    }
    if (dpm["noise_variance"]) {
      cfg.dpm.noise_variance = r.real(dpm["noise_variance"], "noise_variance");
    }
  }

  if (const YAML::Node data = root["data"]) {
    if (cfg.model == ModelId::kGrid) {
      r.fail(data, "the grid model has no dataset");
    }
    cfg.data = r.text(data, "data");
    std::filesystem::path path(cfg.data);
    if (path.is_relative()) {
      path = std::filesystem::path(base_dir) / path;
    }
    try {
      cfg.rows = load_dataset(path.string(), cfg.model == ModelId::kLinReg ? 2 : 1);
    } catch (const Error& e) {
      r.fail(data, e.what());
    }
    if (cfg.rows.empty()) {
      r.fail(data, "dataset '" + path.string() + "' has no observations");
    }
  }

  // Semantic checks that need the assembled model.
  try {
    if (cfg.model == ModelId::kLinReg) {
      make_linreg(cfg);
    } else if (cfg.model == ModelId::kDpm) {
      const DpmModel m = make_dpm(cfg);
      if (cfg.reference == ReferenceMode::kExact && m.observations.size() > 10) {
        r.fail(root["reference"] ? root["reference"] : root["model"],
               "exact dpm reference enumerates partitions and needs at most 10 observations");
      }
    }
  } catch (const Error& e) {
    const char* section = cfg.model == ModelId::kLinReg ? "linreg" : "dpm";
    r.fail(root[section] ? root[section] : root["model"], e.what());
  }
  if (cfg.model == ModelId::kGrid) {
    if (!root["rejuvenation"]) {
      cfg.rejuvenation = {0};
    }
    for (std::size_t reps : cfg.rejuvenation) {
      if (reps != 0) {
        r.fail(root["rejuvenation"], "the grid model has no rejuvenation kernels; use 0");
      }
    }
    if (cfg.reference != ReferenceMode::kExact) {
      r.fail(root["reference"], "the grid model only supports the exact reference");
    }
  }
  return cfg;
}
}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, 0, "cannot open config file");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(buffer.str(), path, dir.empty() ? "." : dir.string());
}

}  // namespace smcdiv::cli
