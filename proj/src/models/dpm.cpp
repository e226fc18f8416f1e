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

#include "smcdiv/models/dpm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace smcdiv {
namespace {

struct ClusterStats {
  double count = 0.0;
  double sum = 0.0;
};

class DpmSeqObs final : public SeqObsModel {
 public:
  explicit DpmSeqObs(DpmModel model) : model_(std::move(model)) {}

  std::size_t num_observations() const override { return model_.observations.size(); }
  bool has_local_latents() const override { return true; }

  std::vector<double> sample_global_prior(RngStream&) const override { return {}; }
  double log_global_prior(std::span<const double>) const override { return 0.0; }

  int sample_local_prior(const SeqState& prefix, RngStream& rng) const override {
    const std::vector<double> counts = table_counts(prefix.local);
    const double total = static_cast<double>(prefix.local.size()) + model_.concentration;
    double u = rng.uniform() * total;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (u < counts[k]) {
        return static_cast<int>(k);
      }
      u -= counts[k];
    }
    return static_cast<int>(counts.size());
  }

  double log_local_prior(const SeqState& prefix, int value) const override {
    const std::vector<double> counts = table_counts(prefix.local);
    const double total = static_cast<double>(prefix.local.size()) + model_.concentration;
    if (value < 0 || static_cast<std::size_t>(value) > counts.size()) {
      return kNegInf;
    }
    const auto k = static_cast<std::size_t>(value);
    return std::log(k == counts.size() ? model_.concentration : counts[k]) - std::log(total);
  }

  double log_likelihood(std::size_t t, const SeqState& state) const override {
    const int label = state.local.at(t - 1);
    ClusterStats stats;
    for (std::size_t s = 0; s + 1 < t; ++s) {
      if (state.local[s] == label) {
        stats.count += 1.0;
        stats.sum += model_.observations[s];
      }
    }
    const double precision = 1.0 / model_.base_variance + stats.count / model_.noise_variance;
    const double mean_var = 1.0 / precision;
    const double mean =
        mean_var * (model_.base_mean / model_.base_variance + stats.sum / model_.noise_variance);
    return normal_log_pdf(model_.observations[t - 1], mean, mean_var + model_.noise_variance);
  }

  double log_joint(std::size_t t, const SeqState& state) const override {
    const std::span<const int> labels(state.local.data(), t);
    double lp = crp_log_prob(labels, model_.concentration);
    std::map<int, std::vector<double>> clusters;
    for (std::size_t s = 0; s < t; ++s) {
      clusters[labels[s]].push_back(model_.observations[s]);
    }
    for (const auto& [label, ys] : clusters) {
      lp += dpm_cluster_log_marginal(ys, model_);
    }
    return lp;
  }

  std::optional<std::vector<SeqState>> enumerate_space(std::size_t t) const override {
    if (t > 10) {
      return std::nullopt;
    }
    std::vector<SeqState> out;
    for (auto& labels : enumerate_partitions(t)) {
      out.push_back(SeqState{{}, std::move(labels)});
    }
    return out;
  }

 private:
  static std::vector<double> table_counts(const std::vector<int>& labels) {
    std::vector<double> counts;
    for (int label : labels) {
      const auto k = static_cast<std::size_t>(label);
      if (counts.size() <= k) {
        counts.resize(k + 1, 0.0);
      }
      counts[k] += 1.0;
    }
    return counts;
  }

  DpmModel model_;
};

}  // namespace

void DpmModel::validate() const {
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw Error(ErrorKind::kConstruction, "DP concentration must be positive");
  }
  if (!(base_variance > 0.0) || !std::isfinite(base_variance)) {
    throw Error(ErrorKind::kConstruction,
                "base measure must be a proper Gaussian (finite positive variance) for the "
                "collapsed predictive");
  }
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance) || !std::isfinite(base_mean)) {
    throw Error(ErrorKind::kConstruction, "noise variance must be positive");
  }
  for (double y : observations) {
    if (!std::isfinite(y)) {
      throw Error(ErrorKind::kConstruction, "observations must be finite");
    }
  }
}

DpmModel default_dpm_model() {
  DpmModel m;
  m.concentration = 1.0;
  m.observations = {-2.1, -1.8, 2.2, -2.4, 1.9, 2.5, -1.6, 2.0};
  m.base_mean = 0.0;
  m.base_variance = 4.0;
  m.noise_variance = 0.25;
  m.validate();
  return m;
}

std::vector<std::vector<int>> enumerate_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<int> labels(n, 0);
  std::vector<int> max_prefix(n, 0);  // max label among labels[0..i-1]
  while (true) {
    out.push_back(labels);
    // Increment the restricted growth string from the right.
    std::size_t i = n - 1;
    while (i > 0 && labels[i] > max_prefix[i]) {
      --i;
    }
    if (i == 0) {
      break;
    }
    ++labels[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      labels[j] = 0;
      max_prefix[j] = std::max(max_prefix[j - 1], labels[j - 1]);
    }
  }
  return out;
}

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::map<int, int> relabel;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = relabel.try_emplace(label, static_cast<int>(relabel.size()));
    out.push_back(it->second);
  }
  return out;
}

double crp_log_prob(std::span<const int> labels, double concentration) {
  std::map<int, double> sizes;
  for (int label : labels) {
    sizes[label] += 1.0;
  }
  const auto n = static_cast<double>(labels.size());
  double lp = static_cast<double>(sizes.size()) * std::log(concentration) +
              std::lgamma(concentration) - std::lgamma(concentration + n);
  for (const auto& [label, size] : sizes) {
    lp += std::lgamma(size);
  }
  return lp;
}

double dpm_cluster_log_marginal(std::span<const double> ys, const DpmModel& model) {
  // ys ~ N(base_mean 1, noise I + base_variance 11'), evaluated in closed form.
  const auto n = static_cast<double>(ys.size());
  const double s2 = model.noise_variance;
  const double t2 = model.base_variance;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double y : ys) {
    const double d = y - model.base_mean;
    sum += d;
    sum_sq += d * d;
  }
  const double log_det = (n - 1.0) * std::log(s2) + std::log(s2 + n * t2);
  const double quad = (sum_sq - t2 * sum * sum / (s2 + n * t2)) / s2;
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

std::shared_ptr<const SeqObsModel> dpm_as_seqobs(const DpmModel& model) {
  model.validate();
  return std::make_shared<DpmSeqObs>(model);
}

DetailedBalanceKernel<SeqState> dpm_gibbs_kernel(std::shared_ptr<const SeqObsModel> seqobs,
                                                 std::size_t t, std::size_t site) {
  std::function<double(const SeqState&)> target = [seqobs, t](const SeqState& x) {
    return seqobs->log_joint(t, x);
  };
  std::function<std::vector<SeqState>(const SeqState&, std::size_t)> candidates =
      [](const SeqState& x, std::size_t j) {
        std::vector<int> others;
        for (std::size_t i = 0; i < x.local.size(); ++i) {
          if (i != j) {
            others.push_back(x.local[i]);
          }
        }
        std::sort(others.begin(), others.end());
        others.erase(std::unique(others.begin(), others.end()), others.end());
        const int fresh = others.empty() ? 0 : others.back() + 1;
        others.push_back(fresh);
        std::vector<SeqState> out;
        out.reserve(others.size());
        for (int label : others) {
          SeqState c = x;
          c.local[j] = label;
          c.local = canonical_labels(c.local);
          out.push_back(std::move(c));
        }
        return out;
      };
  return gibbs_site_kernel<SeqState>(site, conditional_from_target(target, candidates),
                                     "gibbs-site-" + std::to_string(site), t);
}

RejuvenationSchedule dpm_gibbs_schedule(std::shared_ptr<const SeqObsModel> seqobs,
                                        std::size_t repetitions) {
  RejuvenationSchedule schedule;
  for (std::size_t t = 1; t <= seqobs->num_observations(); ++t) {
    StepRejuvenation step;
    for (std::size_t site = 0; site < t; ++site) {
      step.cycle.push_back(dpm_gibbs_kernel(seqobs, t, site));
    }
    step.repetitions = repetitions;
    schedule.steps.push_back(std::move(step));
  }
  return schedule;
}

ReferenceSampler<SeqState> dpm_exact_posterior_sampler(std::shared_ptr<const SeqObsModel> seqobs) {
  const std::size_t n = seqobs->num_observations();
  auto space = seqobs->enumerate_space(n);
  if (!space) {
    throw Error(ErrorKind::kLimitExceeded, "too many observations to enumerate partitions");
  }
  std::vector<double> lp(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) {
    lp[i] = seqobs->log_joint(n, (*space)[i]);
  }
  const double log_z = log_sum_exp(lp);
  std::vector<double> cumulative(lp.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i] - log_z);
    cumulative[i] = acc;
  }
  ReferenceSampler<SeqState> ref;
  ref.exact = true;
  ref.sample = [states = std::move(*space), cumulative](std::size_t, RngStream& rng) {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                         states.size() - 1);
    return states[i];
  };
  return ref;
}

}  // namespace smcdiv
