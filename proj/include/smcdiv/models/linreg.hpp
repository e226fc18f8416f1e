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

#ifndef SMCDIV_MODELS_LINREG_HPP
#define SMCDIV_MODELS_LINREG_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "smcdiv/core.hpp"
#include "smcdiv/seqobs.hpp"

namespace smcdiv {

/// Bayesian linear regression y_t = phi_t' theta + noise with a Gaussian prior
/// on theta and known noise variance.
struct LinRegModel {
  /// Row t holds the features phi_t of observation t.
  Eigen::MatrixXd features;
  Eigen::VectorXd observations;
  Eigen::VectorXd prior_mean;
  Eigen::MatrixXd prior_cov;
  double noise_variance = 1.0;

  /// Features (1, x_t) when `intercept`, else (x_t); isotropic prior.
  static LinRegModel from_points(std::span<const double> x, std::span<const double> y,
                                 bool intercept, double prior_variance, double noise_variance);

  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(prior_mean.size()); }
  [[nodiscard]] std::size_t num_observations() const {
    return static_cast<std::size_t>(observations.size());
  }

  /// Throws Error(kConstruction) on inconsistent shapes, non-positive noise
  /// variance or a prior covariance that is not positive definite.
  void validate() const;
};

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// T = 10 points on [-2, 2] with intercept and slope, prior N(0, I), noise
/// variance 0.25. Same data as data/linreg.txt.
LinRegModel default_linreg_model();

GaussianPosterior linreg_posterior(const LinRegModel& model);

/// Exact log marginal likelihood log p(y_{1:T}).
double linreg_log_evidence(const LinRegModel& model);

/// Draws theta from the exact posterior (as a SeqState with no locals).
ReferenceSampler<SeqState> linreg_exact_posterior_sampler(const LinRegModel& model);

std::shared_ptr<const SeqObsModel> linreg_as_seqobs(const LinRegModel& model);

enum class LinRegKernel {
  /// Single-site Gaussian random walk.
  kRandomWalk,
  /// Single-site independent proposal from the prior marginal.
  kIndependent,
};

/// One MH kernel per coordinate of theta, all targeting step t.
std::vector<DetailedBalanceKernel<SeqState>> linreg_site_cycle(
    const LinRegModel& model, std::shared_ptr<const SeqObsModel> seqobs, std::size_t t,
    LinRegKernel kind, double step_scale);

RejuvenationSchedule linreg_schedule(const LinRegModel& model,
                                     std::shared_ptr<const SeqObsModel> seqobs,
                                     LinRegKernel kind, std::size_t repetitions,
                                     double step_scale = 0.5);

}  // namespace smcdiv

#endif  // SMCDIV_MODELS_LINREG_HPP
