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

#ifndef SMCDIV_SMC_HPP
#define SMCDIV_SMC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smcdiv/core.hpp"
#include "smcdiv/error.hpp"
#include "smcdiv/numeric.hpp"
#include "smcdiv/rng.hpp"

/**
 * \file
 * \brief Generic SMC sampler with independent multinomial resampling, and its
 * conditional-SMC style regeneration procedure.
 *
 * Steps are numbered t = 1..T as in the usual SMC presentation; particle and
 * lineage indices are zero-based. Randomness is drawn from per-purpose child
 * streams of the caller's stream: each particle slot i owns the stream
 * split(kSlots).split(i) for its resampling and kernel draws, the output
 * choice uses split(kOutput), the lineage split(kAncestry) and the backward
 * pass split(kBackward). Traced and untraced runs therefore agree exactly,
 * and collapsing a cycle of plateau steps into one step leaves every draw in
 * place.
 */

namespace smcdiv {

/// Transition into step t (t >= 2), or the output move when used as
/// SmcConfig::final_move.
template <class X>
struct SmcMove {
  /// Samples x_t ~ k_t(. ; x_{t-1}).
  std::function<X(const X& from, RngStream&)> forward;
  /// Samples x_{t-1} ~ l_t(. ; x_t).
  std::function<X(const X& to, RngStream&)> backward;
  /// log w_t(x_{t-1}, x_t).
  std::function<double(const X& prev, const X& next)> log_weight;
  /// When false, a_{t-1}^i = i and I_t = I_{t-1}; every weight of step t - 1
  /// must then be exactly 1. Used for plateau steps. Ignored on final_move.
  bool resample = true;
};

/// Exact densities for every kernel and target. Required by the joint
/// probability evaluators and used for support checks when present.
template <class X>
struct SmcDensities {
  /// log p~_t(x), t in 1..T.
  std::function<double(std::size_t t, const X&)> log_target;
  /// log k_1(x).
  std::function<double(const X&)> log_init;
  /// log k_t(to; from), t in 2..T+1.
  std::function<double(std::size_t t, const X& to, const X& from)> log_forward;
  /// log l_t(to; from), t in 2..T+1.
  std::function<double(std::size_t t, const X& to, const X& from)> log_backward;
};

template <class X>
struct SmcConfig {
  std::size_t steps = 1;
  std::size_t particles = 1;
  std::function<X(RngStream&)> init;
  /// log w_1(x_1).
  std::function<double(const X&)> log_init_weight;
  /// moves[t - 2] is the transition into step t, for t = 2..T.
  std::vector<SmcMove<X>> moves;
  /// k_{T+1}, l_{T+1} and log w_{T+1}(x_T, z).
  SmcMove<X> final_move;
  std::optional<SmcDensities<X>> densities;

  /// Throws Error(kConstruction) if the configuration is malformed.
  void validate() const {
    if (steps < 1 || particles < 1) {
      throw Error(ErrorKind::kConstruction, "SMC needs at least one step and one particle");
    }
    if (moves.size() + 1 != steps) {
      throw Error(ErrorKind::kConstruction,
                  "expected " + std::to_string(steps - 1) + " moves, got " +
                      std::to_string(moves.size()));
    }
    if (!init || !log_init_weight || !final_move.forward || !final_move.backward ||
        !final_move.log_weight) {
      throw Error(ErrorKind::kConstruction, "SMC config has unset procedures");
    }
    for (const auto& m : moves) {
      if (!m.forward || !m.backward || !m.log_weight) {
        throw Error(ErrorKind::kConstruction, "SMC move has unset procedures");
      }
    }
  }
};

/// Every auxiliary choice of one simulate or regenerate run.
template <class X>
struct ExecutionHistory {
  /// particles[t][i] = x_{t+1}^i.
  std::vector<std::vector<X>> particles;
  /// ancestors[t][i] = a_{t+1}^i, the parent (at step t+1) of particle i at step t+2.
  std::vector<std::vector<std::size_t>> ancestors;
  /// lineage[t] = I_{t+1}.
  std::vector<std::size_t> lineage;
  /// log_weights[t][i] = log w_{t+1}^i.
  std::vector<std::vector<double>> log_weights;
  /// log w_{T+1}^1.
  double final_log_weight = 0.0;
};

/// Draws index i with probability exp(log_weights[i] - logsumexp(log_weights)).
/// Entries equal to -inf are never chosen.
std::size_t categorical_from_logweights(std::span<const double> log_weights, RngStream& rng);

/// I_1..I_T, each uniform on {0..N-1}.
std::vector<std::size_t> rand_ancestry(std::size_t particles, std::size_t steps, RngStream& rng);

/// As above, but I_t = I_{t-1} wherever redraw[t - 1] is false (plateau steps).
std::vector<std::size_t> rand_ancestry(std::size_t particles, const std::vector<bool>& redraw,
                                       RngStream& rng);

namespace detail {

inline void check_weight(double lw, std::size_t t, std::size_t i) {
  if (std::isnan(lw)) {
    throw Error(ErrorKind::kInvalidValue, "log w_" + std::to_string(t) + " is NaN for particle " +
                                              std::to_string(i));
  }
  if (lw == std::numeric_limits<double>::infinity()) {
    throw Error(ErrorKind::kSupportViolation,
                "log w_" + std::to_string(t) + " is +inf for particle " + std::to_string(i) +
                    " (forward kernel density zero at a visited pair)");
  }
}

inline double step_log_mean(std::span<const double> lw, std::size_t t) {
  const double v = log_mean_exp(lw);
  if (v == kNegInf) {
    throw Error(ErrorKind::kWeightCollapse,
                "every particle weight is zero at step " + std::to_string(t));
  }
  return v;
}

inline void check_plateau(std::span<const double> lw, std::size_t t) {
  for (double v : lw) {
    if (v != 0.0) {
      throw Error(ErrorKind::kInvalidValue,
                  "step " + std::to_string(t + 1) +
                      " does not resample, so every weight of step " + std::to_string(t) +
                      " must be exactly 1");
    }
  }
}

template <class X>
void check_forward_support(const SmcConfig<X>& cfg, std::size_t t, const X& from, const X& to) {
  if (cfg.densities && cfg.densities->log_backward(t, from, to) == kNegInf) {
    throw Error(ErrorKind::kSupportViolation,
                "k_" + std::to_string(t) + " proposed a state that l_" + std::to_string(t) +
                    " cannot map back");
  }
}

template <class X>
void check_backward_support(const SmcConfig<X>& cfg, std::size_t t, const X& from,
                            const X& to) {
  if (cfg.densities && cfg.densities->log_forward(t, to, from) == kNegInf) {
    throw Error(ErrorKind::kSupportViolation,
                "l_" + std::to_string(t) + " proposed a state that k_" + std::to_string(t) +
                    " cannot reach");
  }
}

inline std::vector<RngStream> slot_streams(const RngStream& rng, std::size_t n) {
  const RngStream base = rng.split(stream_key::kSlots);
  std::vector<RngStream> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(base.split(i));
  }
  return out;
}

template <class X>
std::vector<bool> redraw_flags(const SmcConfig<X>& cfg) {
  std::vector<bool> redraw(cfg.steps, true);
  for (std::size_t t = 2; t <= cfg.steps; ++t) {
    redraw[t - 1] = cfg.moves[t - 2].resample;
  }
  return redraw;
}

template <class X>
void begin_trace(ExecutionHistory<X>* trace, const SmcConfig<X>& cfg) {
  if (trace == nullptr) {
    return;
  }
  *trace = ExecutionHistory<X>{};
  trace->particles.reserve(cfg.steps);
  trace->log_weights.reserve(cfg.steps);
  trace->ancestors.reserve(cfg.steps - 1);
}

}  // namespace detail

/// One forward SMC run. Optionally records the full execution history.
template <class X>
Simulation<X> smc_simulate_traced(const SmcConfig<X>& cfg, RngStream& rng,
                                  ExecutionHistory<X>* trace) {
  cfg.validate();
  const std::size_t n = cfg.particles;
  detail::begin_trace(trace, cfg);
  std::vector<RngStream> slots = detail::slot_streams(rng, n);

  std::vector<X> current;
  current.reserve(n);
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) {
    current.push_back(cfg.init(slots[i]));
    lw[i] = cfg.log_init_weight(current[i]);
    detail::check_weight(lw[i], 1, i);
  }
  double log_evidence = detail::step_log_mean(lw, 1);

  std::vector<X> next;
  std::vector<double> next_lw(n);
  std::vector<std::size_t> parents(n);
  for (std::size_t t = 2; t <= cfg.steps; ++t) {
    const SmcMove<X>& move = cfg.moves[t - 2];
    if (!move.resample) {
      detail::check_plateau(lw, t - 1);
    }
    next.clear();
    next.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      parents[i] = move.resample ? categorical_from_logweights(lw, slots[i]) : i;
      const X& parent = current[parents[i]];
      next.push_back(move.forward(parent, slots[i]));
      detail::check_forward_support(cfg, t, parent, next[i]);
      next_lw[i] = move.log_weight(parent, next[i]);
      detail::check_weight(next_lw[i], t, i);
    }
    log_evidence += detail::step_log_mean(next_lw, t);
    if (trace != nullptr) {
      trace->particles.push_back(std::move(current));
      trace->log_weights.push_back(lw);
      trace->ancestors.push_back(parents);
    }
    current.swap(next);
    lw.swap(next_lw);
  }

  RngStream out_stream = rng.split(stream_key::kOutput);
  const std::size_t chosen = categorical_from_logweights(lw, out_stream);
  X z = cfg.final_move.forward(current[chosen], out_stream);
  detail::check_forward_support(cfg, cfg.steps + 1, current[chosen], z);
  const double final_lw = cfg.final_move.log_weight(current[chosen], z);
  if (std::isnan(final_lw)) {
    throw Error(ErrorKind::kInvalidValue, "log w_{T+1} is NaN");
  }

  if (trace != nullptr) {
    trace->particles.push_back(std::move(current));
    trace->log_weights.push_back(lw);
    trace->final_log_weight = final_lw;
    trace->lineage.assign(cfg.steps, 0);
    trace->lineage[cfg.steps - 1] = chosen;
    for (std::size_t t = cfg.steps - 1; t >= 1; --t) {
      trace->lineage[t - 1] = trace->ancestors[t - 1][trace->lineage[t]];
    }
  }
  return Simulation<X>{std::move(z), -(final_lw + log_evidence)};
}

template <class X>
Simulation<X> smc_simulate(const SmcConfig<X>& cfg, RngStream& rng) {
  return smc_simulate_traced<X>(cfg, rng, nullptr);
}

/// Samples an execution history that could have produced `z` and returns the
/// same log-weight formula as simulate.
template <class X>
double smc_regenerate_traced(const SmcConfig<X>& cfg, const X& z, RngStream& rng,
                             ExecutionHistory<X>* trace) {
  cfg.validate();
  const std::size_t n = cfg.particles;
  const std::size_t steps = cfg.steps;
  detail::begin_trace(trace, cfg);

  RngStream ancestry_stream = rng.split(stream_key::kAncestry);
  const std::vector<std::size_t> lineage =
      rand_ancestry(n, detail::redraw_flags(cfg), ancestry_stream);

  // Ancestral states x_t^{I_t}, sampled backwards from the output.
  RngStream back_stream = rng.split(stream_key::kBackward);
  std::vector<X> fixed;
  fixed.reserve(steps);
  fixed.push_back(cfg.final_move.backward(z, back_stream));
  detail::check_backward_support(cfg, steps + 1, fixed.back(), z);
  for (std::size_t t = steps - 1; t >= 1; --t) {
    const X& later = fixed.back();
    X earlier = cfg.moves[t - 1].backward(later, back_stream);
    detail::check_backward_support(cfg, t + 1, earlier, later);
    fixed.push_back(std::move(earlier));
  }
  std::reverse(fixed.begin(), fixed.end());

  std::vector<RngStream> slots = detail::slot_streams(rng, n);
  std::vector<X> current;
  current.reserve(n);
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) {
    current.push_back(i == lineage[0] ? fixed[0] : cfg.init(slots[i]));
    lw[i] = cfg.log_init_weight(current[i]);
    detail::check_weight(lw[i], 1, i);
  }
  if (lw[lineage[0]] == kNegInf) {
    throw Error(ErrorKind::kSupportViolation, "regenerated ancestor has zero weight at step 1");
  }
  double log_evidence = detail::step_log_mean(lw, 1);

  std::vector<X> next;
  std::vector<double> next_lw(n);
  std::vector<std::size_t> parents(n);
  for (std::size_t t = 2; t <= steps; ++t) {
    const SmcMove<X>& move = cfg.moves[t - 2];
    if (!move.resample) {
      detail::check_plateau(lw, t - 1);
    }
    const std::size_t pinned = lineage[t - 1];
    next.clear();
    next.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == pinned) {
        parents[i] = lineage[t - 2];
        next.push_back(fixed[t - 1]);
      } else {
        parents[i] = move.resample ? categorical_from_logweights(lw, slots[i]) : i;
        next.push_back(move.forward(current[parents[i]], slots[i]));
        detail::check_forward_support(cfg, t, current[parents[i]], next[i]);
      }
      next_lw[i] = move.log_weight(current[parents[i]], next[i]);
      detail::check_weight(next_lw[i], t, i);
    }
    if (next_lw[pinned] == kNegInf) {
      throw Error(ErrorKind::kSupportViolation,
                  "regenerated ancestor has zero weight at step " + std::to_string(t));
    }
    log_evidence += detail::step_log_mean(next_lw, t);
    if (trace != nullptr) {
      trace->particles.push_back(std::move(current));
      trace->log_weights.push_back(lw);
      trace->ancestors.push_back(parents);
    }
    current.swap(next);
    lw.swap(next_lw);
  }

  const double final_lw = cfg.final_move.log_weight(fixed[steps - 1], z);
  if (std::isnan(final_lw)) {
    throw Error(ErrorKind::kInvalidValue, "log w_{T+1} is NaN");
  }
  if (trace != nullptr) {
    trace->particles.push_back(std::move(current));
    trace->log_weights.push_back(lw);
    trace->final_log_weight = final_lw;
    trace->lineage = lineage;
  }
  return -(final_lw + log_evidence);
}

template <class X>
double smc_regenerate(const SmcConfig<X>& cfg, const X& z, RngStream& rng) {
  return smc_regenerate_traced<X>(cfg, z, rng, nullptr);
}

/// SMC simulate/regenerate behind the generic package interface.
template <class X>
SamplerPackage<X> make_smc_package(SmcConfig<X> cfg) {
  cfg.validate();
  auto shared = std::make_shared<const SmcConfig<X>>(std::move(cfg));
  SamplerPackage<X> pkg;
  pkg.simulate = [shared](RngStream& rng) { return smc_simulate(*shared, rng); };
  pkg.regenerate = [shared](const X& z, RngStream& rng) {
    return smc_regenerate(*shared, z, rng);
  };
  return pkg;
}

namespace detail {

template <class X>
void check_history_shape(const SmcConfig<X>& cfg, const ExecutionHistory<X>& h) {
  const std::size_t n = cfg.particles;
  const std::size_t steps = cfg.steps;
  bool ok = h.particles.size() == steps && h.ancestors.size() + 1 == steps &&
            h.lineage.size() == steps && h.log_weights.size() == steps;
  for (std::size_t t = 0; ok && t < steps; ++t) {
    ok = h.particles[t].size() == n && h.lineage[t] < n;
  }
  for (std::size_t t = 0; ok && t + 1 < steps; ++t) {
    ok = h.ancestors[t].size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) {
      ok = h.ancestors[t][i] < n;
    }
  }
  if (!ok) {
    throw Error(ErrorKind::kShapeMismatch, "execution history does not match the SMC config");
  }
  if (!cfg.densities) {
    throw Error(ErrorKind::kPrecondition, "joint probabilities need kernel densities");
  }
}

/// log w_t^i recomputed from target and kernel densities, for t = 1..T.
template <class X>
std::vector<std::vector<double>> weights_from_densities(const SmcConfig<X>& cfg,
                                                        const ExecutionHistory<X>& h) {
  const auto& d = *cfg.densities;
  std::vector<std::vector<double>> w(cfg.steps, std::vector<double>(cfg.particles));
  auto ratio = [](double num, double den) {
    if (num == kNegInf) {
      return kNegInf;
    }
    if (den == kNegInf) {
      throw Error(ErrorKind::kSupportViolation,
                  "history visits a pair with zero forward density but positive backward density");
    }
    return num - den;
  };
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    const X& x = h.particles[0][i];
    w[0][i] = ratio(d.log_target(1, x), d.log_init(x));
  }
  for (std::size_t t = 2; t <= cfg.steps; ++t) {
    for (std::size_t i = 0; i < cfg.particles; ++i) {
      const X& prev = h.particles[t - 2][h.ancestors[t - 2][i]];
      const X& cur = h.particles[t - 1][i];
      w[t - 1][i] = ratio(d.log_target(t, cur) + d.log_backward(t, prev, cur),
                          d.log_target(t - 1, prev) + d.log_forward(t, cur, prev));
    }
  }
  return w;
}

/// log of w_{t-1}^a / sum_j w_{t-1}^j, the probability of resampling parent a.
inline double log_resample_prob(std::span<const double> w, std::size_t a) {
  const double total = log_sum_exp(w);
  if (total == kNegInf || w[a] == kNegInf) {
    return kNegInf;
  }
  return w[a] - total;
}

}  // namespace detail

/// Weight w_t(prev, next) evaluated from its definition,
/// p~_t(next) l_t(prev; next) / (p~_{t-1}(prev) k_t(next; prev)), for t in 2..T.
/// For t = T + 1 it evaluates l_{T+1}(prev; next) / (p~_T(prev) k_{T+1}(next; prev)).
template <class X>
double generic_log_weight(const SmcDensities<X>& d, std::size_t steps, std::size_t t,
                          const X& prev, const X& next) {
  if (t == steps + 1) {
    return d.log_backward(t, prev, next) - d.log_target(steps, prev) -
           d.log_forward(t, next, prev);
  }
  return d.log_target(t, next) + d.log_backward(t, prev, next) - d.log_target(t - 1, prev) -
         d.log_forward(t, next, prev);
}

/// log p(u, z): the probability that simulate makes exactly the choices in
/// `hist` and outputs z. Weights are recomputed from the config's densities.
template <class X>
double p_joint_log_prob(const SmcConfig<X>& cfg, const ExecutionHistory<X>& hist, const X& z) {
  detail::check_history_shape(cfg, hist);
  const auto& d = *cfg.densities;
  const std::size_t n = cfg.particles;
  const std::size_t steps = cfg.steps;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += d.log_init(hist.particles[0][i]);
  }
  for (std::size_t t = 2; t <= steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      total += d.log_forward(t, hist.particles[t - 1][i],
                             hist.particles[t - 2][hist.ancestors[t - 2][i]]);
    }
  }
  const std::size_t out = hist.lineage[steps - 1];
  total += d.log_forward(steps + 1, z, hist.particles[steps - 1][out]);
  if (total == kNegInf) {
    return kNegInf;
  }

  const auto w = detail::weights_from_densities(cfg, hist);
  for (std::size_t t = 2; t <= steps; ++t) {
    const bool resample = cfg.moves[t - 2].resample;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = hist.ancestors[t - 2][i];
      total += resample ? detail::log_resample_prob(w[t - 2], a) : (a == i ? 0.0 : kNegInf);
    }
  }
  total += detail::log_resample_prob(w[steps - 1], out);
  return total;
}

/// log q(u; z): the probability that regenerate(z) makes exactly the choices
/// in `hist`. Histories whose lineage is inconsistent with their ancestors
/// have probability zero.
template <class X>
double q_joint_log_prob(const SmcConfig<X>& cfg, const ExecutionHistory<X>& hist, const X& z) {
  detail::check_history_shape(cfg, hist);
  const auto& d = *cfg.densities;
  const std::size_t n = cfg.particles;
  const std::size_t steps = cfg.steps;
  const auto& lineage = hist.lineage;

  std::size_t lineage_draws = 1;
  for (std::size_t t = 2; t <= steps; ++t) {
    if (hist.ancestors[t - 2][lineage[t - 1]] != lineage[t - 2]) {
      return kNegInf;
    }
    if (cfg.moves[t - 2].resample) {
      ++lineage_draws;
    } else if (lineage[t - 1] != lineage[t - 2]) {
      return kNegInf;
    }
  }

  double total = -static_cast<double>(lineage_draws) * std::log(static_cast<double>(n));
  total += d.log_backward(steps + 1, hist.particles[steps - 1][lineage[steps - 1]], z);
  for (std::size_t t = 2; t <= steps; ++t) {
    total += d.log_backward(t, hist.particles[t - 2][lineage[t - 2]],
                            hist.particles[t - 1][lineage[t - 1]]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i != lineage[0]) {
      total += d.log_init(hist.particles[0][i]);
    }
  }
  for (std::size_t t = 2; t <= steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i != lineage[t - 1]) {
        total += d.log_forward(t, hist.particles[t - 1][i],
                               hist.particles[t - 2][hist.ancestors[t - 2][i]]);
      }
    }
  }
  if (total == kNegInf) {
    return kNegInf;
  }

  const auto w = detail::weights_from_densities(cfg, hist);
  for (std::size_t t = 2; t <= steps; ++t) {
    const bool resample = cfg.moves[t - 2].resample;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == lineage[t - 1]) {
        continue;
      }
      const std::size_t a = hist.ancestors[t - 2][i];
      total += resample ? detail::log_resample_prob(w[t - 2], a) : (a == i ? 0.0 : kNegInf);
    }
  }
  return total;
}

}  // namespace smcdiv

#endif  // SMCDIV_SMC_HPP
