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

#ifndef SMCDIV_MODELS_GRID_HPP
#define SMCDIV_MODELS_GRID_HPP

#include <cstddef>
#include <vector>

#include "smcdiv/core.hpp"
#include "smcdiv/smc.hpp"

namespace smcdiv {

using Table = std::vector<std::vector<double>>;

/// A tiny hidden Markov model with explicit tables, used as a fully
/// enumerable SMC substrate. The state space of every step is {0..K-1};
/// step t targets the filtering joint p(x_t, y_{1:t}).
///
/// Table conventions (rows index the conditioning state):
///   transition[a][b]       = k_t(b; a)
///   backward[t-2][b][a]    = l_t(a; b)        for t = 2..T
///   final_forward[a][b]    = k_{T+1}(b; a)
///   final_backward[b][a]   = l_{T+1}(a; b)
struct GridModel {
  std::size_t states = 2;
  std::vector<double> prior;
  Table transition;
  Table emission;
  std::vector<std::size_t> observations;
  std::vector<Table> backward;
  Table final_forward;
  Table final_backward;

  [[nodiscard]] std::size_t steps() const { return observations.size(); }

  /// Fills unset backward tables with uniform rows and unset final kernels
  /// with the identity.
  void fill_defaults();

  /// Throws Error(kConstruction) on shape errors, tables not normalized to
  /// 1e-12, or kernel pairs violating the support condition.
  void validate() const;
};

/// K = 3, T = 2 model with non-trivial kernels in every slot.
GridModel default_grid_model();

/// log p(x_t, y_{1:t}) for every t and x, by the forward recursion.
std::vector<std::vector<double>> grid_log_targets(const GridModel& model);

/// log p(y_{1:T}) by the forward recursion.
double grid_log_evidence(const GridModel& model);

SmcConfig<int> grid_as_config(const GridModel& model, std::size_t particles);

UnnormalizedPosterior<int> grid_posterior(const GridModel& model);

ReferenceSampler<int> grid_exact_posterior_sampler(const GridModel& model);

}  // namespace smcdiv

#endif  // SMCDIV_MODELS_GRID_HPP
