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

#include "smcdiv/models/linreg.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace smcdiv {
namespace {

Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kConstruction, std::string(what) + " is not positive definite");
  }
  return llt;
}

double mvn_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::LLT<Eigen::MatrixXd>& cov_llt) {
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd solved = cov_llt.matrixL().solve(diff);
  double log_det = 0.0;
  const auto& l = cov_llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    log_det += 2.0 * std::log(l(i, i));
  }
  const auto k = static_cast<double>(x.size());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det + solved.squaredNorm());
}

Eigen::VectorXd as_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class LinRegSeqObs final : public SeqObsModel {
 public:
  explicit LinRegSeqObs(LinRegModel model)
      : model_(std::move(model)),
        prior_llt_(checked_cholesky(model_.prior_cov, "prior covariance")) {
    const Eigen::Index d = model_.prior_mean.size();
    prior_precision_ = prior_llt_.solve(Eigen::MatrixXd::Identity(d, d));
    prior_log_norm_ = mvn_log_pdf(model_.prior_mean, model_.prior_mean, prior_llt_);
  }

  std::size_t num_observations() const override { return model_.num_observations(); }
  bool has_local_latents() const override { return false; }

  std::vector<double> sample_global_prior(RngStream& rng) const override {
    Eigen::VectorXd z(model_.prior_mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) = rng.normal();
    }
    const Eigen::VectorXd theta = model_.prior_mean + prior_llt_.matrixL() * z;
    return {theta.data(), theta.data() + theta.size()};
  }

  double log_global_prior(std::span<const double> global) const override {
    // Hot path: no temporaries.
    const Eigen::Index d = model_.prior_mean.size();
    double quad = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double di = global[static_cast<std::size_t>(i)] - model_.prior_mean(i);
      double row = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        row += prior_precision_(i, j) * (global[static_cast<std::size_t>(j)] - model_.prior_mean(j));
      }
      quad += di * row;
    }
    return prior_log_norm_ - 0.5 * quad;
  }

  int sample_local_prior(const SeqState&, RngStream&) const override { return 0; }
  double log_local_prior(const SeqState&, int) const override { return 0.0; }

  double log_likelihood(std::size_t t, const SeqState& state) const override {
    const auto row = static_cast<Eigen::Index>(t - 1);
    double mean = 0.0;
    for (Eigen::Index j = 0; j < model_.features.cols(); ++j) {
      mean += model_.features(row, j) * state.global[static_cast<std::size_t>(j)];
    }
    return normal_log_pdf(model_.observations(row), mean, model_.noise_variance);
  }

  double log_joint(std::size_t t, const SeqState& state) const override {
    const Eigen::Index d = model_.prior_mean.size();
    double sq = 0.0;
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(t); ++r) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        mean += model_.features(r, j) * state.global[static_cast<std::size_t>(j)];
      }
      const double e = model_.observations(r) - mean;
      sq += e * e;
    }
    return log_global_prior(state.global) -
           0.5 * static_cast<double>(t) * std::log(2.0 * std::numbers::pi * model_.noise_variance) -
           0.5 * sq / model_.noise_variance;
  }

 private:
  LinRegModel model_;
  Eigen::LLT<Eigen::MatrixXd> prior_llt_;
  Eigen::MatrixXd prior_precision_;
  double prior_log_norm_ = 0.0;
};

}  // namespace

LinRegModel LinRegModel::from_points(std::span<const double> x, std::span<const double> y,
                                     bool intercept, double prior_variance,
                                     double noise_variance) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kConstruction, "design points and observations differ in length");
  }
  const Eigen::Index d = intercept ? 2 : 1;
  LinRegModel m;
  m.features.resize(static_cast<Eigen::Index>(x.size()), d);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    if (intercept) {
      m.features(row, 0) = 1.0;
      m.features(row, 1) = x[t];
    } else {
      m.features(row, 0) = x[t];
    }
  }
  m.observations = as_vector(y);
  m.prior_mean = Eigen::VectorXd::Zero(d);
  m.prior_cov = prior_variance * Eigen::MatrixXd::Identity(d, d);
  m.noise_variance = noise_variance;
  m.validate();
  return m;
}

LinRegModel default_linreg_model() {
  const std::vector<double> x = {-2.0,    -1.5556, -1.1111, -0.6667, -0.2222,
                                 0.2222,  0.6667,  1.1111,  1.5556,  2.0};
  const std::vector<double> y = {1.9872,  2.3752,  0.7480,  1.0191,  0.4932,
                                 0.3212,  -0.8366, -1.1176, -1.0754, -1.8015};
  return LinRegModel::from_points(x, y, true, 1.0, 0.25);
}

void LinRegModel::validate() const {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw Error(ErrorKind::kConstruction, "noise variance must be positive");
  }
  if (prior_cov.rows() != prior_mean.size() || prior_cov.cols() != prior_mean.size() ||
      prior_mean.size() == 0) {
    throw Error(ErrorKind::kConstruction, "prior mean and covariance shapes disagree");
  }
  if (features.rows() != observations.size() ||
      (features.rows() > 0 && features.cols() != prior_mean.size())) {
    throw Error(ErrorKind::kConstruction, "feature matrix shape does not match the data");
  }
  if (!observations.allFinite() || !features.allFinite()) {
    throw Error(ErrorKind::kConstruction, "data must be finite");
  }
  checked_cholesky(prior_cov, "prior covariance");
}

GaussianPosterior linreg_posterior(const LinRegModel& model) {
  model.validate();
  const auto prior_llt = checked_cholesky(model.prior_cov, "prior covariance");
  const Eigen::Index d = model.prior_mean.size();
  const Eigen::MatrixXd prior_precision = prior_llt.solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd precision =
      prior_precision +
      model.features.transpose() * model.features / model.noise_variance;
  const auto post_llt = checked_cholesky(precision, "posterior precision");
  GaussianPosterior out;
  out.cov = post_llt.solve(Eigen::MatrixXd::Identity(d, d));
  out.mean = post_llt.solve(prior_precision * model.prior_mean +
                            model.features.transpose() * model.observations /
                                model.noise_variance);
  return out;
}

double linreg_log_evidence(const LinRegModel& model) {
  model.validate();
  const Eigen::Index n = model.observations.size();
  if (n == 0) {
    return 0.0;
  }
  const Eigen::MatrixXd cov =
      model.noise_variance * Eigen::MatrixXd::Identity(n, n) +
      model.features * model.prior_cov * model.features.transpose();
  return mvn_log_pdf(model.observations, model.features * model.prior_mean,
                     checked_cholesky(cov, "marginal covariance"));
}

ReferenceSampler<SeqState> linreg_exact_posterior_sampler(const LinRegModel& model) {
  const GaussianPosterior post = linreg_posterior(model);
  const Eigen::MatrixXd chol = checked_cholesky(post.cov, "posterior covariance").matrixL();
  ReferenceSampler<SeqState> ref;
  ref.exact = true;
  ref.sample = [mean = post.mean, chol](std::size_t, RngStream& rng) {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) = rng.normal();
    }
    const Eigen::VectorXd theta = mean + chol * z;
    return SeqState{{theta.data(), theta.data() + theta.size()}, {}};
  };
  return ref;
}

std::shared_ptr<const SeqObsModel> linreg_as_seqobs(const LinRegModel& model) {
  model.validate();
  return std::make_shared<LinRegSeqObs>(model);
}

std::vector<DetailedBalanceKernel<SeqState>> linreg_site_cycle(
    const LinRegModel& model, std::shared_ptr<const SeqObsModel> seqobs, std::size_t t,
    LinRegKernel kind, double step_scale) {
  std::function<double(const SeqState&)> target = [seqobs, t](const SeqState& x) {
    return seqobs->log_joint(t, x);
  };
  std::vector<DetailedBalanceKernel<SeqState>> cycle;
  for (std::size_t j = 0; j < model.dimension(); ++j) {
    Proposal<SeqState> proposal;
    if (kind == LinRegKernel::kRandomWalk) {
      proposal.sample = [j, step_scale](const SeqState& from, RngStream& rng) {
        SeqState to = from;
        to.global[j] += step_scale * rng.normal();
        return to;
      };
      cycle.push_back(mh_kernel(target, proposal, true, "rw-site-" + std::to_string(j), t));
    } else {
      const auto jj = static_cast<Eigen::Index>(j);
      const double mean = model.prior_mean(jj);
      const double var = model.prior_cov(jj, jj);
      proposal.sample = [j, mean, var](const SeqState& from, RngStream& rng) {
        SeqState to = from;
        to.global[j] = mean + std::sqrt(var) * rng.normal();
        return to;
      };
      proposal.log_density = [j, mean, var](const SeqState& to, const SeqState&) {
        return normal_log_pdf(to.global[j], mean, var);
      };
      cycle.push_back(mh_kernel(target, proposal, false, "imh-site-" + std::to_string(j), t));
    }
  }
  return cycle;
}

RejuvenationSchedule linreg_schedule(const LinRegModel& model,
                                     std::shared_ptr<const SeqObsModel> seqobs,
                                     LinRegKernel kind, std::size_t repetitions,
                                     double step_scale) {
  RejuvenationSchedule schedule;
  for (std::size_t t = 1; t <= model.num_observations(); ++t) {
    StepRejuvenation step;
    step.cycle = linreg_site_cycle(model, seqobs, t, kind, step_scale);
    step.repetitions = repetitions;
    schedule.steps.push_back(std::move(step));
  }
  return schedule;
}

}  // namespace smcdiv
