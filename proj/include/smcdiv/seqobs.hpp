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

#ifndef SMCDIV_SEQOBS_HPP
#define SMCDIV_SEQOBS_HPP

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "smcdiv/core.hpp"
#include "smcdiv/kernels.hpp"
#include "smcdiv/rng.hpp"
#include "smcdiv/smc.hpp"

namespace smcdiv {

/// A point (theta, e_{1:t}) of a sequential-observation model: real-valued
/// global latents and one discrete local latent per observation so far.
struct SeqState {
  std::vector<double> global;
  std::vector<int> local;

  friend bool operator==(const SeqState&, const SeqState&) = default;
  friend auto operator<=>(const SeqState&, const SeqState&) = default;
};

/// Bayesian model p(theta, e_{1:T}, y_{1:T}) observed one y_t at a time.
/// Observation indices t are 1-based.
class SeqObsModel {
 public:
  virtual ~SeqObsModel() = default;

  [[nodiscard]] virtual std::size_t num_observations() const = 0;
  /// False when the model has no per-observation latents (e_t empty).
  [[nodiscard]] virtual bool has_local_latents() const = 0;

  virtual std::vector<double> sample_global_prior(RngStream& rng) const = 0;
  [[nodiscard]] virtual double log_global_prior(std::span<const double> global) const = 0;

  /// e_t ~ p(e_t | theta, e_{1:t-1}) where t = prefix.local.size() + 1.
  virtual int sample_local_prior(const SeqState& prefix, RngStream& rng) const = 0;
  [[nodiscard]] virtual double log_local_prior(const SeqState& prefix, int value) const = 0;

  /// log p(y_t | theta, e_{1:t}, y_{1:t-1}); reads the first t locals.
  [[nodiscard]] virtual double log_likelihood(std::size_t t, const SeqState& state) const = 0;

  /// log p(theta, e_{1:t}, y_{1:t}), the unnormalized step-t target. Models
  /// compute this directly rather than by accumulating the factors above, so
  /// that the two can be checked against each other.
  [[nodiscard]] virtual double log_joint(std::size_t t, const SeqState& state) const = 0;

  /// Every state of X_t, for models small enough to enumerate.
  [[nodiscard]] virtual std::optional<std::vector<SeqState>> enumerate_space(std::size_t) const {
    return std::nullopt;
  }
};

/// Draws (theta, e_{1:t}) from the prior.
SeqState sample_prior(const SeqObsModel& model, std::size_t t, RngStream& rng);

/// Largest |log_joint - (log prior + sum of local priors and likelihoods)|,
/// relative to max(1, |log_joint|), over `draws` prior draws at every t.
double model_consistency_error(const SeqObsModel& model, std::size_t draws, RngStream& rng);

/// Rejuvenation applied before extending step t to t + 1 (or before output
/// when t = T): the cycle is repeated `repetitions` times.
struct StepRejuvenation {
  std::vector<DetailedBalanceKernel<SeqState>> cycle;
  std::size_t repetitions = 1;
  /// When false and the expanded cycle has more than one kernel, its
  /// applications become explicit plateau steps with unit weights instead of
  /// one collapsed step.
  bool collapse = true;

  [[nodiscard]] std::vector<DetailedBalanceKernel<SeqState>> expanded() const;
};

/// steps[t - 1] holds the kernels targeting p~_t, t = 1..T.
struct RejuvenationSchedule {
  std::vector<StepRejuvenation> steps;
};

/// Schedule with no rejuvenation at all (identity kernels).
RejuvenationSchedule no_rejuvenation(std::size_t num_observations);

/// SMC over sequentially observed data with detailed-balance rejuvenation:
/// particles start at the prior, each step rejuvenates under the previous
/// target and extends by prior-sampling e_t, the incremental weight is the
/// likelihood of y_t, and the output move rejuvenates under the final target
/// with log w_{T+1} = -log p(theta', e'_{1:T}, y_{1:T}).
///
/// When the model enumerates its spaces and every kernel has a transition
/// density, and no step space exceeds `density_state_limit` states, the
/// config carries exact densities.
SmcConfig<SeqState> build_seqobs_config(std::shared_ptr<const SeqObsModel> model,
                                        const RejuvenationSchedule& schedule,
                                        std::size_t particles,
                                        std::size_t density_state_limit = 64);

/// Observation index targeted by each engine step of a config built from
/// `schedule` (plateau steps map to the observation they rejuvenate under).
std::vector<std::size_t> seqobs_step_targets(const RejuvenationSchedule& schedule);

UnnormalizedPosterior<SeqState> seqobs_posterior(std::shared_ptr<const SeqObsModel> model);

/// Approximate posterior reference: one long chain of the step-T cycle started
/// from the prior, with burn-in and thinning measured in cycle sweeps. The
/// pool of `count` samples is drawn once; the sampler returns sample `index`.
ReferenceSampler<SeqState> chain_reference(std::shared_ptr<const SeqObsModel> model,
                                           const std::vector<DetailedBalanceKernel<SeqState>>& cycle,
                                           std::size_t count, std::size_t burn_in,
                                           std::size_t thin, RngStream rng);

}  // namespace smcdiv

#endif  // SMCDIV_SEQOBS_HPP
