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

#include "smcdiv/oracle.hpp"

#include <cmath>
#include <string>

#include "smcdiv/smc.hpp"

namespace smcdiv {
namespace {

// Advances a mixed-radix counter; returns false after the last value.
bool advance(std::vector<std::size_t>& digits, std::size_t radix) {
  for (auto& d : digits) {
    if (++d < radix) {
      return true;
    }
    d = 0;
  }
  return false;
}

}  // namespace

std::vector<std::vector<double>> grid_log_targets_by_paths(const GridModel& m) {
  const std::size_t steps = m.steps();
  std::vector<std::vector<double>> totals(steps, std::vector<double>(m.states, 0.0));
  for (std::size_t t = 1; t <= steps; ++t) {
    std::vector<std::size_t> path(t, 0);
    do {
      double p = m.prior[path[0]] * m.emission[path[0]][m.observations[0]];
      for (std::size_t s = 1; s < t; ++s) {
        p *= m.transition[path[s - 1]][path[s]] * m.emission[path[s]][m.observations[s]];
      }
      totals[t - 1][path[t - 1]] += p;
    } while (advance(path, m.states));
  }
  for (auto& row : totals) {
    for (auto& v : row) {
      v = std::log(v);
    }
  }
  return totals;
}

DistTable<int> grid_posterior_table(const GridModel& model) {
  const auto targets = grid_log_targets_by_paths(model);
  std::map<int, double> logs;
  for (std::size_t x = 0; x < model.states; ++x) {
    logs[static_cast<int>(x)] = targets.back()[x];
  }
  return DistTable<int>::from_log_weights(logs);
}

double smc_path_count(const GridModel& model, std::size_t particles) {
  const auto k = static_cast<double>(model.states);
  const auto n = static_cast<double>(particles);
  const auto steps = static_cast<double>(model.steps());
  return std::pow(k, n * steps) * std::pow(n, n * (steps - 1.0)) * n * k;
}

DistTable<int> enumerate_smc_output_marginal(const GridModel& model, std::size_t particles,
                                             double path_limit) {
  model.validate();
  if (particles < 1) {
    throw Error(ErrorKind::kPrecondition, "need at least one particle");
  }
  const double count = smc_path_count(model, particles);
  if (count > path_limit) {
    throw Error(ErrorKind::kLimitExceeded,
                "enumerating " + std::to_string(count) + " execution paths exceeds the limit of " +
                    std::to_string(path_limit));
  }
  const std::size_t n = particles;
  const std::size_t steps = model.steps();
  const std::size_t k = model.states;
  std::vector<std::vector<double>> target = grid_log_targets_by_paths(model);
  for (auto& row : target) {
    for (auto& v : row) {
      v = std::exp(v);
    }
  }

  std::vector<double> marginal(k, 0.0);
  std::vector<std::size_t> x(steps * n, 0);  // x[(t-1) * n + i]
  std::vector<std::size_t> a((steps - 1) * n, 0);  // a[(t-2) * n + i]
  std::vector<double> w(steps * n);
  do {
    double base = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      base *= model.prior[x[i]];
    }
    if (base == 0.0) {
      continue;
    }
    do {
      double p = base;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = target[0][x[i]] / model.prior[x[i]];
      }
      for (std::size_t t = 2; t <= steps && p > 0.0; ++t) {
        double prev_total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          prev_total += w[(t - 2) * n + j];
        }
        for (std::size_t i = 0; i < n && p > 0.0; ++i) {
          const std::size_t parent = a[(t - 2) * n + i];
          const std::size_t from = x[(t - 2) * n + parent];
          const std::size_t to = x[(t - 1) * n + i];
          const double fwd = model.transition[from][to];
          p *= w[(t - 2) * n + parent] / prev_total * fwd;
          if (p > 0.0) {
            w[(t - 1) * n + i] = target[t - 1][to] * model.backward[t - 2][to][from] /
                                 (target[t - 2][from] * fwd);
          }
        }
      }
      if (p == 0.0) {
        continue;
      }
      double last_total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        last_total += w[(steps - 1) * n + j];
      }
      for (std::size_t out = 0; out < n; ++out) {
        const double pick = p * w[(steps - 1) * n + out] / last_total;
        const std::size_t from = x[(steps - 1) * n + out];
        for (std::size_t z = 0; z < k; ++z) {
          marginal[z] += pick * model.final_forward[from][z];
        }
      }
    } while (advance(a, n));
  } while (advance(x, k));

  std::map<int, double> weights;
  for (std::size_t z = 0; z < k; ++z) {
    weights[static_cast<int>(z)] = marginal[z];
  }
  return DistTable<int>::from_weights(weights);
}

BoundDominanceReport verify_grid_bound_dominates(const GridModel& model, std::size_t particles,
                                                 std::size_t replicates, const RngStream& rng,
                                                 double tolerance, std::size_t threads) {
  return verify_bound_dominates<int>(
      make_smc_package(grid_as_config(model, particles)), grid_exact_posterior_sampler(model),
      grid_posterior(model), enumerate_smc_output_marginal(model, particles),
      grid_posterior_table(model), replicates, rng, tolerance, threads);
}

}  // namespace smcdiv
