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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "smcdiv/error.hpp"
#include "smcdiv/models/dpm.hpp"
#include "smcdiv/models/linreg.hpp"
#include "smcdiv/seqobs.hpp"
#include "smcdiv/validation.hpp"

namespace smcdiv {
namespace {

std::shared_ptr<const SeqObsModel> small_dpm(std::size_t n) {
  DpmModel m = default_dpm_model();
  m.observations.resize(n);
  return dpm_as_seqobs(m);
}

TEST(SeqObs, FirstWeightIsGaussianLikelihood) {
  const std::vector<double> x = {1.0};
  const std::vector<double> y = {0.0};
  const LinRegModel m = LinRegModel::from_points(x, y, false, 1.0, 1.0);
  const auto seq = linreg_as_seqobs(m);
  const auto cfg = build_seqobs_config(seq, no_rejuvenation(1), 3);
  EXPECT_NEAR(cfg.log_init_weight(SeqState{{0.0}, {}}), -0.918939, 1e-6);
}

TEST(SeqObs, FinalWeightIsNegativeJoint) {
  const LinRegModel m = default_linreg_model();
  const auto seq = linreg_as_seqobs(m);
  const auto cfg = build_seqobs_config(seq, linreg_schedule(m, seq, LinRegKernel::kRandomWalk, 2), 4);
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) {
    const SeqState x = sample_prior(*seq, 10, rng);
    const SeqState z = cfg.final_move.forward(x, rng);
    EXPECT_EQ(cfg.final_move.log_weight(x, z), -seq->log_joint(10, z));
  }
}

TEST(SeqObs, GenericWeightsMatchLikelihoodWeights) {
  const CheckResult r = check_seqobs_weights(200, RngStream(2));
  EXPECT_TRUE(r.passed) << format_check(r);
  EXPECT_LE(r.measured, 1e-9);
}

TEST(SeqObs, JointIdentityOnMixture) {
  const auto seq = small_dpm(3);
  for (bool collapse : {true, false}) {
    RejuvenationSchedule schedule = dpm_gibbs_schedule(seq, 2);
    for (auto& s : schedule.steps) {
      s.collapse = collapse;
    }
    const auto cfg = build_seqobs_config(seq, schedule, 3);
    ASSERT_TRUE(cfg.densities.has_value());
    const auto ref = dpm_exact_posterior_sampler(seq);
    const RngStream root(3);
    for (std::size_t r = 0; r < 100; ++r) {
      RngStream s = root.split(r);
      ExecutionHistory<SeqState> hist;
      const auto sim = smc_simulate_traced(cfg, s, &hist);
      EXPECT_NEAR(p_joint_log_prob(cfg, hist, sim.output) - q_joint_log_prob(cfg, hist, sim.output),
                  sim.log_weight, 1e-9 * std::max(1.0, std::abs(sim.log_weight)));
      const SeqState z = ref.sample(r, s);
      ExecutionHistory<SeqState> regen;
      const double lw = smc_regenerate_traced(cfg, z, s, &regen);
      EXPECT_NEAR(p_joint_log_prob(cfg, regen, z) - q_joint_log_prob(cfg, regen, z), lw,
                  1e-9 * std::max(1.0, std::abs(lw)));
    }
  }
}

TEST(SeqObs, FrozenKernelsKeepIdentity) {
  const auto seq = small_dpm(3);
  RejuvenationSchedule schedule = no_rejuvenation(3);
  for (std::size_t t = 1; t <= 3; ++t) {
    schedule.steps[t - 1].cycle = {identity_kernel<SeqState>(t), identity_kernel<SeqState>(t)};
    schedule.steps[t - 1].collapse = false;
  }
  const auto cfg = build_seqobs_config(seq, schedule, 2);
  ASSERT_TRUE(cfg.densities.has_value());
  for (std::uint64_t r = 0; r < 50; ++r) {
    RngStream s(r);
    ExecutionHistory<SeqState> hist;
    const auto sim = smc_simulate_traced(cfg, s, &hist);
    EXPECT_NEAR(p_joint_log_prob(cfg, hist, sim.output) - q_joint_log_prob(cfg, hist, sim.output),
                sim.log_weight, 1e-9 * std::max(1.0, std::abs(sim.log_weight)));
  }
}

TEST(SeqObs, PlateauStepsHaveUnitWeightsAndCoupleExactly) {
  const CheckResult r = check_plateau_coupling(100, RngStream(4));
  EXPECT_TRUE(r.passed) << format_check(r);
  EXPECT_EQ(r.measured, 0.0);
}

TEST(SeqObs, CollapsedAndPlateauDistributionsAgree) {
  const auto seq = small_dpm(4);
  RejuvenationSchedule schedule = dpm_gibbs_schedule(seq, 2);
  const auto collapsed = build_seqobs_config(seq, schedule, 3);
  for (auto& s : schedule.steps) {
    s.collapse = false;
  }
  const auto plateau = build_seqobs_config(seq, schedule, 3);
  // Independent streams: compare means rather than paths.
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t r = 0; r < 10000; ++r) {
    RngStream sa = RngStream(5).split(r);
    RngStream sb = RngStream(6).split(r);
    a.push_back(smc_simulate(collapsed, sa).log_weight);
    b.push_back(smc_simulate(plateau, sb).log_weight);
  }
  const SampleSummary sa = summarize(a);
  const SampleSummary sb = summarize(b);
  EXPECT_LT(std::abs(sa.mean - sb.mean), 3.0 * std::hypot(sa.std_error, sb.std_error));
}

TEST(SeqObs, StepTargetsListPlateaus) {
  const auto seq = small_dpm(3);
  RejuvenationSchedule schedule = dpm_gibbs_schedule(seq, 1);
  for (auto& s : schedule.steps) {
    s.collapse = false;
  }
  // Step 1 has one kernel (no plateau); step 2 has two (one plateau).
  EXPECT_EQ(seqobs_step_targets(schedule), (std::vector<std::size_t>{1, 2, 2, 3}));
  EXPECT_EQ(build_seqobs_config(seq, schedule, 2).steps, 4u);
}

TEST(SeqObs, MismatchedKernelTargetIsRejected) {
  const auto seq = small_dpm(3);
  RejuvenationSchedule schedule = dpm_gibbs_schedule(seq, 1);
  schedule.steps[1].cycle.push_back(dpm_gibbs_kernel(seq, 3, 0));
  try {
    build_seqobs_config(seq, schedule, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConstruction);
  }
  EXPECT_THROW(build_seqobs_config(seq, no_rejuvenation(2), 2), Error);
}

// A model whose log_joint forgets the prior.
class BrokenModel final : public SeqObsModel {
 public:
  std::size_t num_observations() const override { return 2; }
  bool has_local_latents() const override { return false; }
  std::vector<double> sample_global_prior(RngStream& rng) const override { return {rng.normal()}; }
  double log_global_prior(std::span<const double> g) const override {
    return normal_log_pdf(g[0], 0.0, 1.0);
  }
  int sample_local_prior(const SeqState&, RngStream&) const override { return 0; }
  double log_local_prior(const SeqState&, int) const override { return 0.0; }
  double log_likelihood(std::size_t, const SeqState& s) const override {
    return normal_log_pdf(1.0, s.global[0], 1.0);
  }
  double log_joint(std::size_t t, const SeqState& s) const override {
    return static_cast<double>(t) * normal_log_pdf(1.0, s.global[0], 1.0);
  }
};

TEST(SeqObs, InconsistentModelIsRejected) {
  try {
    build_seqobs_config(std::make_shared<BrokenModel>(), no_rejuvenation(2), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConstruction);
  }
}

TEST(SeqObs, ChainReferencePoolIsBounded) {
  const auto seq = small_dpm(3);
  const auto cycle = dpm_gibbs_schedule(seq, 1).steps.back().cycle;
  const auto a = chain_reference(seq, cycle, 10, 5, 2, RngStream(1));
  const auto b = chain_reference(seq, cycle, 10, 5, 2, RngStream(1));
  RngStream unused(0);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(a.sample(i, unused), b.sample(i, unused));
  }
  EXPECT_THROW(a.sample(10, unused), Error);
  EXPECT_THROW(chain_reference(seq, cycle, 0, 5, 2, RngStream(1)), Error);
}

TEST(SeqObs, LinRegKernelsHaveDeclaredTargets) {
  const LinRegModel m = default_linreg_model();
  const auto seq = linreg_as_seqobs(m);
  for (auto kind : {LinRegKernel::kRandomWalk, LinRegKernel::kIndependent}) {
    const auto schedule = linreg_schedule(m, seq, kind, 3);
    ASSERT_EQ(schedule.steps.size(), 10u);
    for (std::size_t t = 1; t <= 10; ++t) {
      EXPECT_EQ(schedule.steps[t - 1].expanded().size(), 6u);
      for (const auto& k : schedule.steps[t - 1].cycle) {
        EXPECT_EQ(k.target, t);
      }
    }
  }
}

TEST(SeqObs, LinRegKernelsLeavePosteriorInvariant) {
  // Stationarity check: start from exact posterior draws, apply one sweep,
  // and compare the first two moments.
  const LinRegModel m = default_linreg_model();
  const auto seq = linreg_as_seqobs(m);
  const auto post = linreg_posterior(m);
  const auto ref = linreg_exact_posterior_sampler(m);
  for (auto kind : {LinRegKernel::kRandomWalk, LinRegKernel::kIndependent}) {
    const auto cycle = linreg_site_cycle(m, seq, 10, kind, 0.3);
    RngStream rng(kind == LinRegKernel::kRandomWalk ? 7 : 8);
    const int n = 40000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      SeqState x = ref.sample(0, rng);
      for (const auto& k : cycle) {
        x = k.step(x, rng);
      }
      sum += x.global[1];
      sq += (x.global[1] - post.mean(1)) * (x.global[1] - post.mean(1));
    }
    const double var = post.cov(1, 1);
    EXPECT_NEAR(sum / n, post.mean(1), 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(sq / n, var, 4.0 * var * std::sqrt(2.0 / n));
  }
}

}  // namespace
}  // namespace smcdiv
