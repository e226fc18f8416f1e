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

#include "smcdiv/seqobs.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace smcdiv {
namespace {

using Kernels = std::vector<DetailedBalanceKernel<SeqState>>;

SeqState truncated(const SeqObsModel& model, const SeqState& x) {
  SeqState out = x;
  if (model.has_local_latents() && !out.local.empty()) {
    out.local.pop_back();
  }
  return out;
}

SeqState apply_all(const Kernels& kernels, SeqState x, RngStream& rng) {
  for (const auto& k : kernels) {
    x = k.step(x, rng);
  }
  return x;
}

Kernels reversed(Kernels kernels) {
  std::reverse(kernels.begin(), kernels.end());
  return kernels;
}

// Shape of one engine step, kept for density evaluation.
struct StepShape {
  Kernels kernels;
  bool extends = false;
  std::size_t space = 0;  // observation index of the state space rejuvenated in
};

}  // namespace

SeqState sample_prior(const SeqObsModel& model, std::size_t t, RngStream& rng) {
  SeqState x;
  x.global = model.sample_global_prior(rng);
  if (model.has_local_latents()) {
    for (std::size_t s = 1; s <= t; ++s) {
      x.local.push_back(model.sample_local_prior(x, rng));
    }
  }
  return x;
}

double model_consistency_error(const SeqObsModel& model, std::size_t draws, RngStream& rng) {
  double worst = 0.0;
  const std::size_t steps = model.num_observations();
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t t = 1; t <= steps; ++t) {
      const SeqState x = sample_prior(model, t, rng);
      double decomposed = model.log_global_prior(x.global);
      SeqState prefix{x.global, {}};
      for (std::size_t s = 1; s <= t; ++s) {
        if (model.has_local_latents()) {
          decomposed += model.log_local_prior(prefix, x.local[s - 1]);
          prefix.local.push_back(x.local[s - 1]);
        }
        decomposed += model.log_likelihood(s, x);
      }
      const double direct = model.log_joint(t, x);
      worst = std::max(worst, std::abs(direct - decomposed) / std::max(1.0, std::abs(direct)));
    }
  }
  return worst;
}

std::vector<DetailedBalanceKernel<SeqState>> StepRejuvenation::expanded() const {
  Kernels out;
  out.reserve(cycle.size() * repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    out.insert(out.end(), cycle.begin(), cycle.end());
  }
  return out;
}

RejuvenationSchedule no_rejuvenation(std::size_t num_observations) {
  RejuvenationSchedule schedule;
  schedule.steps.resize(num_observations);
  return schedule;
}

std::vector<std::size_t> seqobs_step_targets(const RejuvenationSchedule& schedule) {
  std::vector<std::size_t> targets{1};
  for (std::size_t t = 2; t <= schedule.steps.size(); ++t) {
    const StepRejuvenation& rejuv = schedule.steps[t - 2];
    const std::size_t applications = rejuv.cycle.size() * rejuv.repetitions;
    if (!rejuv.collapse && applications > 1) {
      targets.insert(targets.end(), applications - 1, t - 1);
    }
    targets.push_back(t);
  }
  return targets;
}

SmcConfig<SeqState> build_seqobs_config(std::shared_ptr<const SeqObsModel> model,
                                        const RejuvenationSchedule& schedule,
                                        std::size_t particles,
                                        std::size_t density_state_limit) {
  const std::size_t num_obs = model->num_observations();
  if (num_obs < 1) {
    throw Error(ErrorKind::kConstruction, "model has no observations");
  }
  if (schedule.steps.size() != num_obs) {
    throw Error(ErrorKind::kConstruction,
                "schedule has " + std::to_string(schedule.steps.size()) + " steps for " +
                    std::to_string(num_obs) + " observations");
  }
  for (std::size_t t = 1; t <= num_obs; ++t) {
    for (const auto& k : schedule.steps[t - 1].cycle) {
      if (k.target != t) {
        throw Error(ErrorKind::kConstruction,
                    "kernel '" + k.name + "' targets step " + std::to_string(k.target) +
                        " but is scheduled for step " + std::to_string(t));
      }
    }
  }
  RngStream check_rng(0x5eed);
  if (const double err = model_consistency_error(*model, 4, check_rng); err > 1e-9) {
    throw Error(ErrorKind::kConstruction,
                "model log_joint disagrees with its factorization (relative error " +
                    std::to_string(err) + ")");
  }

  SmcConfig<SeqState> cfg;
  cfg.particles = particles;
  cfg.init = [model](RngStream& rng) { return sample_prior(*model, 1, rng); };
  cfg.log_init_weight = [model](const SeqState& x) { return model->log_likelihood(1, x); };

  std::vector<StepShape> shapes;
  for (std::size_t t = 2; t <= num_obs; ++t) {
    const StepRejuvenation& rejuv = schedule.steps[t - 2];
    Kernels kernels = rejuv.expanded();
    Kernels extend_with = std::move(kernels);
    if (!rejuv.collapse && extend_with.size() > 1) {
      for (std::size_t j = 0; j + 1 < extend_with.size(); ++j) {
        const DetailedBalanceKernel<SeqState> k = extend_with[j];
        SmcMove<SeqState> plateau;
        plateau.forward = k.step;
        plateau.backward = k.step;
        plateau.log_weight = [](const SeqState&, const SeqState&) { return 0.0; };
        plateau.resample = (j == 0);
        cfg.moves.push_back(std::move(plateau));
        shapes.push_back(StepShape{Kernels{k}, false, t - 1});
      }
      extend_with = Kernels{extend_with.back()};
    }
    const bool resample = rejuv.collapse || rejuv.expanded().size() <= 1;
    SmcMove<SeqState> move;
    move.forward = [model, extend_with](const SeqState& from, RngStream& rng) {
      SeqState x = apply_all(extend_with, from, rng);
      if (model->has_local_latents()) {
        x.local.push_back(model->sample_local_prior(x, rng));
      }
      return x;
    };
    move.backward = [model, back = reversed(extend_with)](const SeqState& to, RngStream& rng) {
      return apply_all(back, truncated(*model, to), rng);
    };
    move.log_weight = [model, t](const SeqState&, const SeqState& next) {
      return model->log_likelihood(t, next);
    };
    move.resample = resample;
    cfg.moves.push_back(std::move(move));
    shapes.push_back(StepShape{std::move(extend_with), true, t - 1});
  }
  cfg.steps = cfg.moves.size() + 1;

  const Kernels final_kernels = schedule.steps[num_obs - 1].expanded();
  cfg.final_move.forward = [final_kernels](const SeqState& from, RngStream& rng) {
    return apply_all(final_kernels, from, rng);
  };
  cfg.final_move.backward = [back = reversed(final_kernels)](const SeqState& to, RngStream& rng) {
    return apply_all(back, to, rng);
  };
  cfg.final_move.log_weight = [model, num_obs](const SeqState&, const SeqState& z) {
    return -model->log_joint(num_obs, z);
  };

  // Exact densities for small discrete models.
  std::vector<std::vector<SeqState>> spaces;
  bool enumerable = true;
  for (std::size_t t = 1; t <= num_obs && enumerable; ++t) {
    auto space = model->enumerate_space(t);
    enumerable = space.has_value() && space->size() <= density_state_limit;
    if (enumerable) {
      spaces.push_back(std::move(*space));
    }
  }
  for (const auto& rejuv : schedule.steps) {
    for (const auto& k : rejuv.cycle) {
      enumerable = enumerable && static_cast<bool>(k.log_transition);
    }
  }
  if (enumerable) {
    const std::vector<std::size_t> targets = seqobs_step_targets(schedule);
    auto shared_spaces = std::make_shared<const std::vector<std::vector<SeqState>>>(std::move(spaces));
    auto shared_shapes = std::make_shared<const std::vector<StepShape>>(std::move(shapes));
    const std::size_t steps = cfg.steps;
    SmcDensities<SeqState> d;
    d.log_target = [model, targets](std::size_t s, const SeqState& x) {
      return model->log_joint(targets[s - 1], x);
    };
    d.log_init = [model](const SeqState& x) {
      double lp = model->log_global_prior(x.global);
      if (model->has_local_latents()) {
        lp += model->log_local_prior(SeqState{x.global, {}}, x.local.at(0));
      }
      return lp;
    };
    d.log_forward = [model, shared_spaces, shared_shapes, final_kernels, steps, num_obs](
                        std::size_t s, const SeqState& to, const SeqState& from) {
      if (s == steps + 1) {
        return chain_log_transition(final_kernels, (*shared_spaces)[num_obs - 1], to, from);
      }
      const StepShape& shape = (*shared_shapes)[s - 2];
      const auto& space = (*shared_spaces)[shape.space - 1];
      if (!shape.extends) {
        return chain_log_transition(shape.kernels, space, to, from);
      }
      const SeqState mid = truncated(*model, to);
      double lp = chain_log_transition(shape.kernels, space, mid, from);
      if (model->has_local_latents()) {
        lp += model->log_local_prior(mid, to.local.back());
      }
      return lp;
    };
    d.log_backward = [model, shared_spaces, shared_shapes, back_final = reversed(final_kernels),
                      steps, num_obs](std::size_t s, const SeqState& to, const SeqState& from) {
      if (s == steps + 1) {
        return chain_log_transition(back_final, (*shared_spaces)[num_obs - 1], to, from);
      }
      const StepShape& shape = (*shared_shapes)[s - 2];
      const auto& space = (*shared_spaces)[shape.space - 1];
      const SeqState start = shape.extends ? truncated(*model, from) : from;
      return chain_log_transition(reversed(shape.kernels), space, to, start);
    };
    cfg.densities = std::move(d);
  }
  cfg.validate();
  return cfg;
}

UnnormalizedPosterior<SeqState> seqobs_posterior(std::shared_ptr<const SeqObsModel> model) {
  const std::size_t num_obs = model->num_observations();
  return UnnormalizedPosterior<SeqState>{
      [model, num_obs](const SeqState& z) { return model->log_joint(num_obs, z); }};
}

ReferenceSampler<SeqState> chain_reference(std::shared_ptr<const SeqObsModel> model,
                                           const std::vector<DetailedBalanceKernel<SeqState>>& cycle,
                                           std::size_t count, std::size_t burn_in,
                                           std::size_t thin, RngStream rng) {
  if (count < 1 || thin < 1) {
    throw Error(ErrorKind::kPrecondition, "chain reference needs count >= 1 and thin >= 1");
  }
  if (cycle.empty()) {
    throw Error(ErrorKind::kPrecondition, "chain reference needs at least one kernel");
  }
  auto pool = std::make_shared<std::vector<SeqState>>();
  pool->reserve(count);
  SeqState state = sample_prior(*model, model->num_observations(), rng);
  for (std::size_t s = 0; s < burn_in; ++s) {
    state = apply_all(cycle, std::move(state), rng);
  }
  while (pool->size() < count) {
    for (std::size_t s = 0; s < thin; ++s) {
      state = apply_all(cycle, std::move(state), rng);
    }
    pool->push_back(state);
  }
  ReferenceSampler<SeqState> ref;
  ref.exact = false;
  ref.sample = [pool](std::size_t index, RngStream&) {
    if (index >= pool->size()) {
      throw Error(ErrorKind::kPrecondition,
                  "reference draw " + std::to_string(index) + " exceeds the chain pool of " +
                      std::to_string(pool->size()));
    }
    return (*pool)[index];
  };
  return ref;
}

}  // namespace smcdiv
