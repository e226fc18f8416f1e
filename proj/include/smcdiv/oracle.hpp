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

#ifndef SMCDIV_ORACLE_HPP
#define SMCDIV_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "smcdiv/core.hpp"
#include "smcdiv/error.hpp"
#include "smcdiv/models/grid.hpp"
#include "smcdiv/numeric.hpp"

/**
 * \file
 * \brief Brute-force enumeration oracles. Nothing here calls the SMC engine
 * or its weight code; grid quantities are recomputed from the model tables.
 */

namespace smcdiv {

/// Normalized distribution over a finite set of points.
template <class K>
class DistTable {
 public:
  DistTable() = default;

  /// Normalizes exp(log_weights). Throws if every weight is zero.
  static DistTable from_log_weights(const std::map<K, double>& log_weights) {
    std::vector<double> values;
    values.reserve(log_weights.size());
    for (const auto& [k, lw] : log_weights) {
      values.push_back(lw);
    }
    DistTable out;
    out.log_normalizer_ = log_sum_exp(values);
    if (out.log_normalizer_ == kNegInf) {
      throw Error(ErrorKind::kPrecondition, "cannot normalize an all-zero table");
    }
    for (const auto& [k, lw] : log_weights) {
      out.probs_[k] = std::exp(lw - out.log_normalizer_);
    }
    return out;
  }

  static DistTable from_weights(const std::map<K, double>& weights) {
    std::map<K, double> logs;
    for (const auto& [k, w] : weights) {
      logs[k] = std::log(w);
    }
    return from_log_weights(logs);
  }

  [[nodiscard]] double prob(const K& k) const {
    auto it = probs_.find(k);
    return it == probs_.end() ? 0.0 : it->second;
  }
  [[nodiscard]] const std::map<K, double>& probs() const { return probs_; }
  /// log of the sum of the weights the table was built from.
  [[nodiscard]] double log_normalizer() const { return log_normalizer_; }
  [[nodiscard]] double total() const {
    double s = 0.0;
    for (const auto& [k, p] : probs_) {
      s += p;
    }
    return s;
  }

 private:
  std::map<K, double> probs_;
  double log_normalizer_ = 0.0;
};

/// log sum_z pi~(z) over a finite space.
template <class Z>
double enumerate_log_Z(const UnnormalizedPosterior<Z>& post, const std::vector<Z>& space) {
  if (space.empty()) {
    throw Error(ErrorKind::kPrecondition, "cannot enumerate an empty space");
  }
  if (space.size() > 1000000) {
    throw Error(ErrorKind::kLimitExceeded, "space has more than 1e6 points");
  }
  std::vector<double> lp(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    lp[i] = post.log_prob(space[i]);
  }
  return log_sum_exp(lp);
}

struct SymmetricKl {
  double value = 0.0;
  bool support_mismatch = false;
};

/// KL(a || b) + KL(b || a); +inf with a flag when supports differ.
template <class K>
SymmetricKl exact_symmetric_kl(const DistTable<K>& a, const DistTable<K>& b) {
  SymmetricKl out;
  std::map<K, std::pair<double, double>> joined;
  for (const auto& [k, p] : a.probs()) {
    joined[k].first = p;
  }
  for (const auto& [k, p] : b.probs()) {
    joined[k].second = p;
  }
  for (const auto& [k, pq] : joined) {
    const auto [p, q] = pq;
    if ((p > 0.0) != (q > 0.0)) {
      out.support_mismatch = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    if (p > 0.0) {
      out.value += (p - q) * (std::log(p) - std::log(q));
    }
  }
  return out;
}

/// Exact output distribution p(z) = sum_u p(u, z) of SMC with `particles`
/// particles on a grid model, summing the joint over every execution history.
/// Refuses (kLimitExceeded) when the history count exceeds `path_limit`.
DistTable<int> enumerate_smc_output_marginal(const GridModel& model, std::size_t particles,
                                             double path_limit = 1e7);

/// Number of (history, output) combinations enumerate_smc_output_marginal visits.
double smc_path_count(const GridModel& model, std::size_t particles);

/// log p(x_t, y_{1:t}) by summing over every hidden path x_{1:t}.
std::vector<std::vector<double>> grid_log_targets_by_paths(const GridModel& model);

/// Exact posterior pi(x_T) of the grid model, by path enumeration.
DistTable<int> grid_posterior_table(const GridModel& model);

struct BoundDominanceReport {
  double mean = 0.0;
  double std_error = 0.0;
  double exact = 0.0;
  bool dominates = false;
  double tolerance = 0.0;
  double eubo = 0.0;
  double elbo = 0.0;
};

/// Runs estimate_kl_bound with `replicates` samples on each side and compares
/// its mean against the exact symmetric KL between `output` (the package's
/// exact output distribution) and `posterior`. Dominance means
/// mean + 3 stderr >= exact - tolerance.
template <class Z>
BoundDominanceReport verify_bound_dominates(const SamplerPackage<Z>& pkg,
                                            const ReferenceSampler<Z>& reference,
                                            const UnnormalizedPosterior<Z>& post,
                                            const DistTable<Z>& output,
                                            const DistTable<Z>& posterior,
                                            std::size_t replicates, const RngStream& rng,
                                            double tolerance = 0.0, std::size_t threads = 1) {
  const DivergenceEstimate est =
      estimate_kl_bound(pkg, reference, post, replicates, replicates, rng, threads);
  BoundDominanceReport report;
  report.mean = est.kl_bound;
  report.std_error = std::sqrt(est.eubo_stderr * est.eubo_stderr + est.elbo_stderr * est.elbo_stderr);
  report.exact = exact_symmetric_kl(output, posterior).value;
  report.tolerance = tolerance;
  report.dominates = report.mean + 3.0 * report.std_error >= report.exact - tolerance;
  report.eubo = est.eubo;
  report.elbo = est.elbo;
  return report;
}

/// verify_bound_dominates for SMC on a grid model with an exact reference.
BoundDominanceReport verify_grid_bound_dominates(const GridModel& model, std::size_t particles,
                                                 std::size_t replicates, const RngStream& rng,
                                                 double tolerance = 0.0,
                                                 std::size_t threads = 1);

}  // namespace smcdiv

#endif  // SMCDIV_ORACLE_HPP
