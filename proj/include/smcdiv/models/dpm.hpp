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

#ifndef SMCDIV_MODELS_DPM_HPP
#define SMCDIV_MODELS_DPM_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "smcdiv/seqobs.hpp"

namespace smcdiv {

/// Dirichlet process mixture of 1-D Gaussians with known within-cluster
/// variance and a conjugate Gaussian prior on cluster means, which are
/// integrated out. The only latents are the cluster assignments.
struct DpmModel {
  double concentration = 1.0;
  std::vector<double> observations;
  double base_mean = 0.0;
  /// Prior variance of a cluster mean. Must be finite and positive: anything
  /// else leaves no conjugate predictive.
  double base_variance = 1.0;
  double noise_variance = 1.0;

  void validate() const;
};

/// Two well separated groups, T = 8, concentration 1, base N(0, 4), noise
/// variance 0.25. Same data as data/dpm.txt.
DpmModel default_dpm_model();

/// Partitions of {1..n} as restricted growth strings (labels in order of first
/// appearance).
std::vector<std::vector<int>> enumerate_partitions(std::size_t n);

/// Relabels assignments in order of first appearance.
std::vector<int> canonical_labels(std::span<const int> labels);

/// log P(partition) under the Chinese restaurant process.
double crp_log_prob(std::span<const int> labels, double concentration);

/// log of the marginal density of `ys` when they share one cluster.
double dpm_cluster_log_marginal(std::span<const double> ys, const DpmModel& model);

std::shared_ptr<const SeqObsModel> dpm_as_seqobs(const DpmModel& model);

/// Single-site Gibbs kernel for the assignment of observation `site`
/// (0-based) under the step-t target.
DetailedBalanceKernel<SeqState> dpm_gibbs_kernel(std::shared_ptr<const SeqObsModel> seqobs,
                                                 std::size_t t, std::size_t site);

/// Per step t, a cycle of Gibbs kernels over sites 1..t.
RejuvenationSchedule dpm_gibbs_schedule(std::shared_ptr<const SeqObsModel> seqobs,
                                        std::size_t repetitions);

/// Exact posterior over partitions by enumeration (n <= 10).
ReferenceSampler<SeqState> dpm_exact_posterior_sampler(std::shared_ptr<const SeqObsModel> seqobs);

}  // namespace smcdiv

#endif  // SMCDIV_MODELS_DPM_HPP
