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

#include "smcdiv/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "smcdiv/models/dpm.hpp"
#include "smcdiv/models/grid.hpp"
#include "smcdiv/models/linreg.hpp"
#include "smcdiv/parallel.hpp"
#include "smcdiv/seqobs.hpp"
#include "smcdiv/smc.hpp"
#include "smcdiv/validation.hpp"

namespace smcdiv::cli {
namespace {

DivergenceEstimate estimate_linreg(const ExperimentConfig& cfg, std::size_t particles,
                                   std::size_t reps, const RngStream& cell, std::size_t threads) {
  const LinRegModel lm = make_linreg(cfg);
  auto seq = linreg_as_seqobs(lm);
  const std::size_t num_obs = lm.num_observations();
  const LinRegKernel kind = cfg.linreg.kernel == "independent" ? LinRegKernel::kIndependent
                                                               : LinRegKernel::kRandomWalk;
  const RejuvenationSchedule schedule =
      reps == 0 ? no_rejuvenation(num_obs)
                : linreg_schedule(lm, seq, kind, reps, cfg.linreg.step_scale);
  const auto pkg = make_smc_package(build_seqobs_config(seq, schedule, particles));
  const ReferenceSampler<SeqState> ref =
      cfg.reference == ReferenceMode::kExact
          ? linreg_exact_posterior_sampler(lm)
          : chain_reference(seq, linreg_site_cycle(lm, seq, num_obs, kind, cfg.linreg.step_scale),
                            cfg.n_reference, cfg.burn_in, cfg.thin,
                            cell.split(stream_key::kChain));
  return estimate_kl_bound(pkg, ref, seqobs_posterior(seq), cfg.n_reference, cfg.n_forward, cell,
                           threads);
}

DivergenceEstimate estimate_dpm(const ExperimentConfig& cfg, std::size_t particles,
                                std::size_t reps, const RngStream& cell, std::size_t threads) {
  auto seq = dpm_as_seqobs(make_dpm(cfg));
  const std::size_t num_obs = seq->num_observations();
  const RejuvenationSchedule schedule =
      reps == 0 ? no_rejuvenation(num_obs) : dpm_gibbs_schedule(seq, reps);
  const auto pkg = make_smc_package(build_seqobs_config(seq, schedule, particles));
  const ReferenceSampler<SeqState> ref =
      cfg.reference == ReferenceMode::kExact
          ? dpm_exact_posterior_sampler(seq)
          : chain_reference(seq, dpm_gibbs_schedule(seq, 1).steps.back().cycle, cfg.n_reference,
                            cfg.burn_in, cfg.thin, cell.split(stream_key::kChain));
  return estimate_kl_bound(pkg, ref, seqobs_posterior(seq), cfg.n_reference, cfg.n_forward, cell,
                           threads);
}

DivergenceEstimate estimate_grid(const ExperimentConfig& cfg, std::size_t particles,
                                 const RngStream& cell, std::size_t threads) {
  const GridModel model = default_grid_model();
  const auto pkg = make_smc_package(grid_as_config(model, particles));
  return estimate_kl_bound(pkg, grid_exact_posterior_sampler(model), grid_posterior(model),
                           cfg.n_reference, cfg.n_forward, cell, threads);
}

std::string number(double v) { return fmt::format("{:.10g}", v); }

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  file << contents;
  if (!file) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

ExperimentConfig load_with_overrides(const std::string& path, const CommandOptions& options) {
  ExperimentConfig cfg = load_config(path);
  if (options.seed) {
    cfg.seed = *options.seed;
  }
  return cfg;
}

std::string csv_table(const std::vector<CellResult>& cells) {
  std::string out = csv_header();
  for (const auto& c : cells) {
    out += csv_line(c.row);
  }
  return out;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& cfg, std::size_t particles, std::size_t rejuvenation,
                    std::size_t cell_index, std::size_t threads) {
  const RngStream cell = RngStream(cfg.seed).split(cell_index);
  const auto start = std::chrono::steady_clock::now();
  CellResult out;
  switch (cfg.model) {
    case ModelId::kLinReg:
      out.estimate = estimate_linreg(cfg, particles, rejuvenation, cell, threads);
      break;
    case ModelId::kDpm:
      out.estimate = estimate_dpm(cfg, particles, rejuvenation, cell, threads);
      break;
    case ModelId::kGrid:
      out.estimate = estimate_grid(cfg, particles, cell, threads);
      break;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  ResultRow& row = out.row;
  row.model = to_string(cfg.model);
  row.particles = particles;
  row.rejuvenation = rejuvenation;
  row.elbo = out.estimate.elbo;
  row.elbo_stderr = out.estimate.elbo_stderr;
  row.eubo = out.estimate.eubo;
  row.eubo_stderr = out.estimate.eubo_stderr;
  row.kl_bound = out.estimate.kl_bound;
  // Off by default: timing would break byte-identical reruns.
  row.wall_time_s = cfg.record_wall_time ? elapsed.count() : 0.0;
  row.seed = cfg.seed;
  row.reference_mode = to_string(cfg.reference);
  return out;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& cfg, std::size_t threads,
                                       bool concurrent_cells) {
  struct Cell {
    std::size_t particles;
    std::size_t rejuvenation;
  };
  std::vector<Cell> cells;
  for (std::size_t n : cfg.particles) {
    for (std::size_t r : cfg.rejuvenation) {
      cells.push_back({n, r});
    }
  }
  std::vector<CellResult> out(cells.size());
  if (concurrent_cells) {
    parallel_for(cells.size(), threads, [&](std::size_t i) {
      out[i] = run_cell(cfg, cells[i].particles, cells[i].rejuvenation, i, 1);
    });
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out[i] = run_cell(cfg, cells[i].particles, cells[i].rejuvenation, i, threads);
    }
  }
  return out;
}

std::string csv_header() {
  return fmt::format(
      "# smcdiv results v{}\n"
      "model,N,rejuvenation,elbo,elbo_stderr,eubo,eubo_stderr,kl_bound,wall_time_s,seed,"
      "reference_mode\n",
      kSchemaVersion);
}

std::string csv_line(const ResultRow& row) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", row.model, row.particles,
                     row.rejuvenation, number(row.elbo), number(row.elbo_stderr), number(row.eubo),
                     number(row.eubo_stderr), number(row.kl_bound), number(row.wall_time_s),
                     row.seed, row.reference_mode);
}

std::string json_line(const CellResult& cell, const ExperimentConfig& cfg, bool with_samples) {
  const ResultRow& row = cell.row;
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = cfg.name;
  j["model"] = row.model;
  j["N"] = row.particles;
  j["rejuvenation"] = row.rejuvenation;
  j["elbo"] = row.elbo;
  j["elbo_stderr"] = row.elbo_stderr;
  j["eubo"] = row.eubo;
  j["eubo_stderr"] = row.eubo_stderr;
  j["kl_bound"] = row.kl_bound;
  j["wall_time_s"] = row.wall_time_s;
  j["seed"] = row.seed;
  j["reference_mode"] = row.reference_mode;
  j["subjective"] = cell.estimate.subjective;
  j["n_reference"] = cell.estimate.n_reference;
  j["n_forward"] = cell.estimate.n_forward;
  if (with_samples) {
    j["reference_log_ratios"] = cell.estimate.reference_log_ratios;
    j["forward_log_ratios"] = cell.estimate.forward_log_ratios;
  }
  return j.dump() + "\n";
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const CommandOptions& options) {
  if (options.out_dir) {
    return *options.out_dir;
  }
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output;
}

int cmd_estimate(const std::string& config_path, const CommandOptions& options, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with_overrides(config_path, options);
    const std::string table = csv_table(run_experiment(cfg, options.threads, false));
    write_file(std::filesystem::path(resolve_output_dir(cfg, options)) / (cfg.name + ".csv"), table);
    out << table;
    return kExitOk;
  });
}

int cmd_sweep(const std::string& config_path, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = load_with_overrides(config_path, options);
    const std::vector<CellResult> cells = run_experiment(cfg, options.threads, true);
    const std::filesystem::path dir(resolve_output_dir(cfg, options));
    std::string lines;
    for (const auto& c : cells) {
      lines += json_line(c, cfg, cfg.dump_samples);
    }
    const std::string table = csv_table(cells);
    write_file(dir / (cfg.name + ".csv"), table);
    write_file(dir / (cfg.name + ".jsonl"), lines);
    out << table;
    return kExitOk;
  });
}

int cmd_validate(bool negative_controls, double scale, const CommandOptions& options,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ValidationOptions vo;
    vo.scale = scale;
    vo.threads = options.threads;
    vo.negative_controls = negative_controls;
    const std::vector<CheckResult> results =
        run_validation_suite(vo, RngStream(options.seed.value_or(20161)));
    std::size_t passed = 0;
    for (const auto& r : results) {
      out << format_check(r) << '\n';
      passed += r.passed ? 1 : 0;
    }
    out << fmt::format("{}/{} checks passed\n", passed, results.size());
    return passed == results.size() ? kExitOk : kExitValidationFailure;
  });
}

}  // namespace smcdiv::cli
