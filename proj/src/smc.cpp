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

#include "smcdiv/smc.hpp"

#include <cmath>

namespace smcdiv {

std::size_t categorical_from_logweights(std::span<const double> log_weights, RngStream& rng) {
  const double total = log_sum_exp(log_weights);
  if (total == kNegInf || log_weights.empty()) {
    throw Error(ErrorKind::kWeightCollapse, "cannot sample from all-zero weights");
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] == kNegInf) {
      continue;
    }
    cumulative += std::exp(log_weights[i] - total);
    last_positive = i;
    if (u < cumulative) {
      return i;
    }
  }
  // Rounding left the cumulative sum a hair below one.
  return last_positive;
}

std::vector<std::size_t> rand_ancestry(std::size_t particles, std::size_t steps, RngStream& rng) {
  return rand_ancestry(particles, std::vector<bool>(steps, true), rng);
}

std::vector<std::size_t> rand_ancestry(std::size_t particles, const std::vector<bool>& redraw,
                                       RngStream& rng) {
  if (particles < 1 || redraw.empty()) {
    throw Error(ErrorKind::kPrecondition, "rand_ancestry needs N >= 1 and T >= 1");
  }
  std::vector<std::size_t> lineage(redraw.size());
  for (std::size_t t = 0; t < redraw.size(); ++t) {
    lineage[t] = (t == 0 || redraw[t]) ? rng.uniform_index(particles) : lineage[t - 1];
  }
  return lineage;
}

}  // namespace smcdiv
