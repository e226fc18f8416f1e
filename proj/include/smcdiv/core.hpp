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

#ifndef SMCDIV_CORE_HPP
#define SMCDIV_CORE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "smcdiv/error.hpp"
#include "smcdiv/numeric.hpp"
#include "smcdiv/parallel.hpp"
#include "smcdiv/rng.hpp"

namespace smcdiv {

template <class Z>
struct Simulation {
  Z output;
  /// log(p(u, z) / q(u; z)) for the execution history u that produced output.
  double log_weight;
};

/// A sampler exposed through its simulate/regenerate pair. Both procedures
/// return log(p(u, z) / q(u; z)); simulate draws (u, z) from the sampler,
/// regenerate draws u from the meta-inference distribution q(u; z) for a
/// given z. The auxiliary choices u never leave the package.
///
/// Implementations must be safe to call concurrently with distinct streams.
template <class Z>
struct SamplerPackage {
  std::function<Simulation<Z>(RngStream&)> simulate;
  std::function<double(const Z&, RngStream&)> regenerate;
};

/// log pi~(z), the posterior known up to its normalizer.
template <class Z>
struct UnnormalizedPosterior {
  std::function<double(const Z&)> log_prob;
};

/// Source of (approximate) posterior samples for the upper-bound term. When
/// `exact` is false the resulting bound is only as trustworthy as the
/// reference and is reported as subjective. Each call receives the index of
/// the reference draw and a stream dedicated to that draw.
template <class Z>
struct ReferenceSampler {
  std::function<Z(std::size_t index, RngStream&)> sample;
  bool exact = true;
};

/// One side of the divergence bound: per-sample log(pi~(z)) - log_weight.
struct BoundTerm {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
  std::vector<double> log_ratios;
};

struct DivergenceEstimate {
  double kl_bound = 0.0;
  double eubo = 0.0;
  double elbo = 0.0;
  double eubo_stderr = 0.0;
  double elbo_stderr = 0.0;
  std::size_t n_reference = 0;
  std::size_t n_forward = 0;
  std::vector<double> reference_log_ratios;
  std::vector<double> forward_log_ratios;
  bool subjective = false;
};

namespace detail {

inline double checked_log_ratio(double log_target, double log_weight, const char* term,
                                std::size_t index) {
  const std::string where = std::string(term) + " sample " + std::to_string(index);
  if (std::isnan(log_target)) {
    throw Error(ErrorKind::kInvalidValue, "unnormalized posterior returned NaN at " + where);
  }
  if (!std::isfinite(log_target)) {
    throw Error(ErrorKind::kImpossible,
                "unnormalized posterior is not finite at " + where);
  }
  if (std::isnan(log_weight)) {
    throw Error(ErrorKind::kInvalidValue, "sampler log-weight is NaN at " + where);
  }
  if (log_weight == kNegInf) {
    throw Error(ErrorKind::kImpossible, "sampler log-weight is -inf at " + where);
  }
  if (!std::isfinite(log_weight)) {
    throw Error(ErrorKind::kInvalidValue, "sampler log-weight is +inf at " + where);
  }
  return log_target - log_weight;
}

inline BoundTerm make_term(std::vector<double> ratios) {
  const SampleSummary s = summarize(ratios);
  BoundTerm term;
  term.mean = s.mean;
  term.std_error = s.std_error;
  term.n = s.n;
  term.degenerate = s.degenerate;
  term.log_ratios = std::move(ratios);
  return term;
}

}  // namespace detail

/// Mean of log pi~(z) - log_weight over m simulate calls. Its expectation
/// lower-bounds log Z.
template <class Z>
BoundTerm estimate_elbo(const SamplerPackage<Z>& pkg, const UnnormalizedPosterior<Z>& post,
                        std::size_t m, const RngStream& rng, std::size_t threads = 1) {
  if (m < 1) {
    throw Error(ErrorKind::kPrecondition, "estimate_elbo needs at least one forward sample");
  }
  const RngStream base = rng.split(stream_key::kSimulate);
  std::vector<double> ratios(m);
  parallel_for(m, threads, [&](std::size_t j) {
    RngStream stream = base.split(j);
    const Simulation<Z> sim = pkg.simulate(stream);
    ratios[j] = detail::checked_log_ratio(post.log_prob(sim.output), sim.log_weight, "forward", j);
  });
  return detail::make_term(std::move(ratios));
}

/// Mean of log pi~(z) - regenerate(z) for z drawn from the reference. With an
/// exact reference its expectation upper-bounds log Z.
template <class Z>
BoundTerm estimate_eubo(const SamplerPackage<Z>& pkg, const ReferenceSampler<Z>& reference,
                        const UnnormalizedPosterior<Z>& post, std::size_t n, const RngStream& rng,
                        std::size_t threads = 1) {
  if (n < 1) {
    throw Error(ErrorKind::kPrecondition, "estimate_eubo needs at least one reference sample");
  }
  const RngStream ref_base = rng.split(stream_key::kReference);
  const RngStream regen_base = rng.split(stream_key::kRegenerate);
  std::vector<double> ratios(n);
  parallel_for(n, threads, [&](std::size_t i) {
    RngStream ref_stream = ref_base.split(i);
    const Z z = reference.sample(i, ref_stream);
    RngStream regen_stream = regen_base.split(i);
    const double log_weight = pkg.regenerate(z, regen_stream);
    ratios[i] = detail::checked_log_ratio(post.log_prob(z), log_weight, "reference", i);
  });
  return detail::make_term(std::move(ratios));
}

/// Unbiased estimate of an upper bound on the symmetric KL divergence between
/// the package's output distribution and the posterior: EUBO minus ELBO.
template <class Z>
DivergenceEstimate estimate_kl_bound(const SamplerPackage<Z>& pkg,
                                     const ReferenceSampler<Z>& reference,
                                     const UnnormalizedPosterior<Z>& post,
                                     std::size_t n_reference, std::size_t n_forward,
                                     const RngStream& rng, std::size_t threads = 1) {
  if (n_reference < 1 || n_forward < 1) {
    throw Error(ErrorKind::kPrecondition,
                "estimate_kl_bound needs n_reference >= 1 and n_forward >= 1");
  }
  BoundTerm upper = estimate_eubo(pkg, reference, post, n_reference, rng, threads);
  BoundTerm lower = estimate_elbo(pkg, post, n_forward, rng, threads);
  DivergenceEstimate out;
  out.eubo = upper.mean;
  out.elbo = lower.mean;
  out.kl_bound = out.eubo - out.elbo;
  out.eubo_stderr = upper.std_error;
  out.elbo_stderr = lower.std_error;
  out.n_reference = n_reference;
  out.n_forward = n_forward;
  out.reference_log_ratios = std::move(upper.log_ratios);
  out.forward_log_ratios = std::move(lower.log_ratios);
  out.subjective = !reference.exact;
  return out;
}

/// Wraps a sampler whose output density is tractable. There are no auxiliary
/// choices, so both procedures return log p(z).
template <class Z>
SamplerPackage<Z> tractable_adapter(std::function<Z(RngStream&)> sample,
                                    std::function<double(const Z&)> log_density) {
  auto checked = [log_density](const Z& z) {
    const double lp = log_density(z);
    if (std::isnan(lp)) {
      throw Error(ErrorKind::kInvalidValue, "tractable sampler density is NaN");
    }
    if (lp == kNegInf) {
      throw Error(ErrorKind::kImpossible, "point has zero density under the tractable sampler");
    }
    return lp;
  };
  SamplerPackage<Z> pkg;
  pkg.simulate = [sample, checked](RngStream& rng) {
    Z z = sample(rng);
    const double lp = checked(z);
    return Simulation<Z>{std::move(z), lp};
  };
  pkg.regenerate = [checked](const Z& z, RngStream&) { return checked(z); };
  return pkg;
}

}  // namespace smcdiv

#endif  // SMCDIV_CORE_HPP
