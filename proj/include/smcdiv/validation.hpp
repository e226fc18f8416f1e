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

#ifndef SMCDIV_VALIDATION_HPP
#define SMCDIV_VALIDATION_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "smcdiv/rng.hpp"

namespace smcdiv {

/// Outcome of one validation check: a measured quantity against a tolerance.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  /// Multiplies every sample count (1 = full size). Counts never drop below 10.
  double scale = 1.0;
  std::size_t threads = 1;
  /// Adds checks that are expected to fail (a broken kernel must be caught).
  bool negative_controls = false;
};

/// (p_joint - q_joint) against the returned log weight for traced simulate and
/// regenerate runs on the 3-state grid model with two particles. Measured:
/// largest relative deviation.
CheckResult check_joint_identity(std::size_t runs, const RngStream& rng);

/// Mean of the SMC evidence estimate on the grid model against the enumerated
/// evidence. Measured: |difference| in standard errors.
CheckResult check_evidence_unbiased(std::size_t runs, const RngStream& rng, std::size_t threads = 1);

/// One-sided ELBO <= log Z and EUBO >= log Z on the default regression
/// problem. Measured: the larger violation in standard errors.
CheckResult check_linreg_sandwich(std::size_t samples, const RngStream& rng,
                                  std::size_t threads = 1);

/// Long-run kl_bound mean on the grid model with one particle is at least the
/// exact symmetric KL. Measured: (exact - mean) in standard errors.
CheckResult check_bound_dominance(std::size_t replicates, const RngStream& rng,
                                  std::size_t threads = 1);

/// kl_bound with 40 particles does not exceed kl_bound with 1 particle on the
/// default regression problem. Measured: (kl_40 - kl_1) in pooled stderrs.
CheckResult check_particle_trend(std::size_t samples, const RngStream& rng,
                                 std::size_t threads = 1);

/// Generic density-ratio weights against the likelihood weights actually used
/// by sequential-observation SMC, on a 3-point mixture. Measured: largest
/// relative deviation.
CheckResult check_seqobs_weights(std::size_t pairs_per_step, const RngStream& rng);

/// Plateau steps contribute exactly zero log weight, and collapsed and
/// uncollapsed rejuvenation give identical log weights under shared streams.
/// Measured: largest absolute log-weight difference.
CheckResult check_plateau_coupling(std::size_t runs, const RngStream& rng);

/// Exact flow check for every shipped discrete kernel. With
/// `negative_control`, also checks that a broken kernel is rejected.
std::vector<CheckResult> check_kernels(bool negative_control);

/// kl_bound of a tractable 2-state sampler against the exact symmetric KL.
/// Measured: |difference| in standard errors.
CheckResult check_tractable_exactness(std::size_t samples, const RngStream& rng,
                                      std::size_t threads = 1);

/// Every check above at full size (scaled by options.scale).
std::vector<CheckResult> run_validation_suite(const ValidationOptions& options,
                                              const RngStream& rng);

/// "PASS name: measured=... tolerance=... (detail)".
std::string format_check(const CheckResult& result);

}  // namespace smcdiv

#endif  // SMCDIV_VALIDATION_HPP
