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

#ifndef SMCDIV_KERNELS_HPP
#define SMCDIV_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "smcdiv/error.hpp"
#include "smcdiv/numeric.hpp"
#include "smcdiv/rng.hpp"

namespace smcdiv {

/// A Markov kernel declared to satisfy detailed balance with respect to the
/// target of SMC step `target`. Declared targets are checked when kernels are
/// assembled into a schedule; the kernel itself is never inspected.
template <class X>
struct DetailedBalanceKernel {
  std::string name;
  std::size_t target = 0;
  std::function<X(const X&, RngStream&)> step;
  /// log d(to; from). Empty when transition probabilities are not computable.
  std::function<double(const X& to, const X& from)> log_transition;
};

template <class X>
struct Proposal {
  std::function<X(const X& from, RngStream&)> sample;
  /// log q(to; from). Required unless the proposal is declared symmetric.
  std::function<double(const X& to, const X& from)> log_density;
  /// Finite support of q(. ; from). With log_density it makes the MH
  /// transition probabilities exactly computable.
  std::function<std::vector<X>(const X& from)> support;
};

/// min(1, p~(to) q(from; to) / (p~(from) q(to; from))) on the log scale.
template <class X>
double mh_log_accept(const std::function<double(const X&)>& log_target,
                     const Proposal<X>& proposal, bool symmetric, const X& from, const X& to) {
  const double target_to = log_target(to);
  if (target_to == kNegInf) {
    return kNegInf;
  }
  const double target_from = log_target(from);
  if (target_from == kNegInf) {
    return 0.0;
  }
  double ratio = target_to - target_from;
  if (!symmetric) {
    const double back = proposal.log_density(from, to);
    if (back == kNegInf) {
      throw Error(ErrorKind::kSupportViolation,
                  "MH proposal cannot return to the current state from its proposal");
    }
    ratio += back - proposal.log_density(to, from);
  }
  return std::min(0.0, ratio);
}

/// One Metropolis-Hastings accept/reject step targeting log_target.
template <class X>
DetailedBalanceKernel<X> mh_kernel(std::function<double(const X&)> log_target,
                                   Proposal<X> proposal, bool symmetric, std::string name = "mh",
                                   std::size_t target = 0) {
  if (!log_target || !proposal.sample || (!symmetric && !proposal.log_density)) {
    throw Error(ErrorKind::kConstruction,
                "MH kernel needs a target, a proposal sampler and, unless symmetric, its density");
  }
  DetailedBalanceKernel<X> k;
  k.name = std::move(name);
  k.target = target;
  k.step = [log_target, proposal, symmetric](const X& from, RngStream& rng) {
    X to = proposal.sample(from, rng);
    const double log_accept = mh_log_accept(log_target, proposal, symmetric, from, to);
    const double u = rng.uniform();
    if (log_accept == 0.0 || std::log(u) < log_accept) {
      return to;
    }
    return from;
  };
  if (proposal.support && proposal.log_density) {
    k.log_transition = [log_target, proposal, symmetric](const X& to, const X& from) {
      double stay = 0.0;
      double move = 0.0;
      for (const X& y : proposal.support(from)) {
        const double q = std::exp(proposal.log_density(y, from));
        if (q == 0.0) {
          continue;
        }
        const double a = std::exp(mh_log_accept(log_target, proposal, symmetric, from, y));
        if (y == from) {
          stay += q;
        } else {
          stay += q * (1.0 - a);
          if (y == to) {
            move += q * a;
          }
        }
      }
      return std::log(to == from ? stay : move);
    };
  }
  return k;
}

/// Candidate states for one site together with their conditional probabilities.
template <class X>
using SiteConditional = std::function<std::vector<std::pair<X, double>>(const X&, std::size_t)>;

/// Builds a site conditional from an unnormalized target and a candidate
/// generator: probabilities are proportional to the target at each candidate.
/// The candidate set must not depend on the current value of the site.
template <class X>
SiteConditional<X> conditional_from_target(
    std::function<double(const X&)> log_target,
    std::function<std::vector<X>(const X&, std::size_t)> candidates) {
  return [log_target, candidates](const X& x, std::size_t site) {
    std::vector<X> states = candidates(x, site);
    std::vector<double> lp(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      lp[i] = log_target(states[i]);
    }
    const double total = log_sum_exp(lp);
    std::vector<std::pair<X, double>> out;
    out.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      out.emplace_back(std::move(states[i]), std::exp(lp[i] - total));
    }
    return out;
  };
}

/// Resamples one site from its full conditional.
template <class X>
DetailedBalanceKernel<X> gibbs_site_kernel(std::size_t site, SiteConditional<X> conditional,
                                           std::string name = "gibbs", std::size_t target = 0) {
  auto checked = [site, conditional](const X& x) {
    auto options = conditional(x, site);
    double total = 0.0;
    for (const auto& [state, p] : options) {
      if (!(p >= 0.0)) {
        throw Error(ErrorKind::kInvalidValue, "Gibbs conditional has a negative probability");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInvalidValue,
                  "Gibbs conditional for site " + std::to_string(site) + " sums to " +
                      std::to_string(total));
    }
    return options;
  };
  DetailedBalanceKernel<X> k;
  k.name = std::move(name);
  k.target = target;
  k.step = [checked](const X& x, RngStream& rng) {
    auto options = checked(x);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (auto& [state, p] : options) {
      cumulative += p;
      if (u < cumulative) {
        return std::move(state);
      }
    }
    // Rounding: fall back to the last candidate with positive mass.
    for (auto it = options.rbegin(); it != options.rend(); ++it) {
      if (it->second > 0.0) {
        return std::move(it->first);
      }
    }
    return x;
  };
  k.log_transition = [checked](const X& to, const X& from) {
    double p = 0.0;
    for (const auto& [state, prob] : checked(from)) {
      if (state == to) {
        p += prob;
      }
    }
    return std::log(p);
  };
  return k;
}

template <class X>
DetailedBalanceKernel<X> identity_kernel(std::size_t target = 0) {
  DetailedBalanceKernel<X> k;
  k.name = "identity";
  k.target = target;
  k.step = [](const X& x, RngStream&) { return x; };
  k.log_transition = [](const X& to, const X& from) { return to == from ? 0.0 : kNegInf; };
  return k;
}

/// Forward and backward kernels of a collapsed cycle.
template <class X>
struct CollapsedCycle {
  std::function<X(const X&, RngStream&)> forward;
  std::function<X(const X&, RngStream&)> backward;
};

/// Collapses a cycle of kernels sharing one target into a single forward
/// kernel applying them in order and a backward kernel applying them in
/// reverse order (or in the same order when reverse_for_backward is false).
/// An empty cycle collapses to the identity.
template <class X>
CollapsedCycle<X> cycle_collapse(std::vector<DetailedBalanceKernel<X>> cycle,
                                 bool reverse_for_backward = true) {
  for (const auto& k : cycle) {
    if (k.target != cycle.front().target) {
      throw Error(ErrorKind::kConstruction, "kernels in one cycle must share a target");
    }
  }
  std::vector<DetailedBalanceKernel<X>> backward = cycle;
  if (reverse_for_backward) {
    std::reverse(backward.begin(), backward.end());
  }
  auto apply = [](const std::vector<DetailedBalanceKernel<X>>& ks) {
    return [ks](const X& x, RngStream& rng) {
      X state = x;
      for (const auto& k : ks) {
        state = k.step(state, rng);
      }
      return state;
    };
  };
  return CollapsedCycle<X>{apply(cycle), apply(backward)};
}

/// log of the transition probability of applying `kernels` in order,
/// computed by propagating a distribution over the enumerated `space`.
/// Every kernel needs log_transition; `from` must belong to `space`.
template <class X>
double chain_log_transition(const std::vector<DetailedBalanceKernel<X>>& kernels,
                            const std::vector<X>& space, const X& to, const X& from) {
  auto index_of = [&space](const X& x) {
    auto it = std::find(space.begin(), space.end(), x);
    if (it == space.end()) {
      throw Error(ErrorKind::kPrecondition, "state is outside the enumerated space");
    }
    return static_cast<std::size_t>(it - space.begin());
  };
  std::vector<double> dist(space.size(), 0.0);
  dist[index_of(from)] = 1.0;
  for (const auto& k : kernels) {
    if (!k.log_transition) {
      throw Error(ErrorKind::kPrecondition, "kernel '" + k.name + "' has no transition density");
    }
    std::vector<double> next(space.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (dist[i] == 0.0) {
        continue;
      }
      for (std::size_t j = 0; j < space.size(); ++j) {
        next[j] += dist[i] * std::exp(k.log_transition(space[j], space[i]));
      }
    }
    dist.swap(next);
  }
  return std::log(dist[index_of(to)]);
}

struct DetailedBalanceReport {
  /// True when transition probabilities were enumerated exactly.
  bool exact = true;
  /// Exact mode: max over ordered pairs of |pi(x) P(x -> y) - pi(y) P(y -> x)|,
  /// with pi the normalized target.
  double max_violation = 0.0;
  /// Empirical mode: Bowker symmetry statistic of (x, kernel(x)) pair counts
  /// for x drawn from pi, its degrees of freedom and p-value.
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  double alpha = 0.0;

  [[nodiscard]] bool passed(double tolerance) const {
    return exact ? max_violation <= tolerance : p_value >= alpha;
  }
};

struct EmpiricalBalanceOptions {
  std::size_t draws = 100000;
  double alpha = 0.01;
};

/// Checks detailed balance of `kernel` with respect to `log_target` on a
/// finite space. Falls back to an empirical symmetry test when the kernel has
/// no transition density.
template <class X>
DetailedBalanceReport check_detailed_balance(const DetailedBalanceKernel<X>& kernel,
                                             const std::function<double(const X&)>& log_target,
                                             const std::vector<X>& space, RngStream& rng,
                                             EmpiricalBalanceOptions options = {}) {
  if (space.empty() || space.size() > 1000) {
    throw Error(ErrorKind::kPrecondition, "detailed balance check needs 1..1000 states");
  }
  std::vector<double> lp(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    lp[i] = log_target(space[i]);
  }
  const double log_z = log_sum_exp(lp);
  std::vector<double> pi(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    pi[i] = std::exp(lp[i] - log_z);
  }

  DetailedBalanceReport report;
  if (kernel.log_transition) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      for (std::size_t j = i + 1; j < space.size(); ++j) {
        const double forward = pi[i] * std::exp(kernel.log_transition(space[j], space[i]));
        const double backward = pi[j] * std::exp(kernel.log_transition(space[i], space[j]));
        report.max_violation = std::max(report.max_violation, std::abs(forward - backward));
      }
    }
    return report;
  }

  report.exact = false;
  report.alpha = options.alpha;
  const std::size_t n = space.size();
  std::vector<double> counts(n * n, 0.0);
  for (std::size_t d = 0; d < options.draws; ++d) {
    const double u = rng.uniform();
    std::size_t i = 0;
    double cumulative = pi[0];
    while (u >= cumulative && i + 1 < n) {
      cumulative += pi[++i];
    }
    const X y = kernel.step(space[i], rng);
    auto it = std::find(space.begin(), space.end(), y);
    if (it == space.end()) {
      throw Error(ErrorKind::kPrecondition, "kernel left the enumerated space");
    }
    counts[i * n + static_cast<std::size_t>(it - space.begin())] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = counts[i * n + j];
      const double b = counts[j * n + i];
      if (a + b > 0.0) {
        report.statistic += (a - b) * (a - b) / (a + b);
        ++report.degrees_of_freedom;
      }
    }
  }
  if (report.degrees_of_freedom > 0) {
    const boost::math::chi_squared dist(static_cast<double>(report.degrees_of_freedom));
    report.p_value = boost::math::cdf(boost::math::complement(dist, report.statistic));
  }
  return report;
}

}  // namespace smcdiv

#endif  // SMCDIV_KERNELS_HPP
