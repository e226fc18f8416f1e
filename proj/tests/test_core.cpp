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
#include <limits>
#include <numbers>
#include <vector>

#include "smcdiv/core.hpp"
#include "smcdiv/error.hpp"
#include "smcdiv/numeric.hpp"

namespace smcdiv {
namespace {

constexpr double kLog2 = std::numbers::ln2;

TEST(Numeric, LogSumExpIsStable) {
  const std::vector<double> v = {1000.0, 1000.0};
  EXPECT_DOUBLE_EQ(log_sum_exp(v), 1000.0 + kLog2);
  const std::vector<double> all_neg = {kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(all_neg), kNegInf);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kNegInf);
}

TEST(Numeric, LogMeanExp) {
  const std::vector<double> v = {std::log(1.0), std::log(3.0)};
  EXPECT_NEAR(log_mean_exp(v), std::log(2.0), 1e-15);
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(log_mean_exp(zeros), 0.0);
}

TEST(Numeric, SummarizeSingleValueIsDegenerate) {
  const std::vector<double> one = {2.5};
  const SampleSummary s = summarize(one);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_EQ(s.std_error, 0.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(Numeric, SummarizeStandardError) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const SampleSummary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_FALSE(s.degenerate);
}

TEST(Numeric, NormalLogPdf) {
  EXPECT_NEAR(normal_log_pdf(0.0, 0.0, 1.0), -0.918939, 1e-6);
  EXPECT_NEAR(normal_log_pdf(1.0, 0.0, 2.0), -1.515513, 1e-6);
}

// Sampler p on {0, 1} with the given probabilities.
SamplerPackage<int> two_state(double p0) {
  return tractable_adapter<int>(
      [p0](RngStream& rng) { return rng.uniform() < p0 ? 0 : 1; },
      [p0](const int& z) { return std::log(z == 0 ? p0 : 1.0 - p0); });
}

ReferenceSampler<int> two_state_reference(double p0) {
  ReferenceSampler<int> ref;
  ref.sample = [p0](std::size_t, RngStream& rng) { return rng.uniform() < p0 ? 0 : 1; };
  return ref;
}

UnnormalizedPosterior<int> weights(double w0, double w1) {
  return {[w0, w1](const int& z) { return std::log(z == 0 ? w0 : w1); }};
}

TEST(Estimators, ExactSamplerGivesZeroBound) {
  const auto est = estimate_kl_bound(two_state(0.5), two_state_reference(0.5), weights(1, 1), 100,
                                     100, RngStream(1));
  EXPECT_EQ(est.kl_bound, 0.0);
  EXPECT_NEAR(est.elbo, kLog2, 1e-15);
  EXPECT_NEAR(est.eubo, kLog2, 1e-15);
  EXPECT_LT(est.elbo_stderr, 1e-12);
  EXPECT_LT(est.eubo_stderr, 1e-12);
  for (double r : est.forward_log_ratios) {
    EXPECT_NEAR(r, kLog2, 1e-15);
  }
  EXPECT_FALSE(est.subjective);
}

TEST(Estimators, TwoStateExpectations) {
  const RngStream rng(99);
  const std::size_t n = 100000;
  const BoundTerm lower = estimate_elbo(two_state(0.5), weights(3, 1), n, rng);
  const BoundTerm upper = estimate_eubo(two_state(0.5), two_state_reference(0.75), weights(3, 1), n, rng);
  EXPECT_NEAR(lower.mean, 1.242453, 3.0 * lower.std_error);
  EXPECT_NEAR(upper.mean, 1.517106, 3.0 * upper.std_error);
  EXPECT_LE(1.242453, std::log(4.0));
  EXPECT_GE(1.517106, std::log(4.0));
  const auto est =
      estimate_kl_bound(two_state(0.5), two_state_reference(0.75), weights(3, 1), n, n, rng);
  EXPECT_NEAR(est.kl_bound, 0.274653, 3.0 * std::hypot(est.elbo_stderr, est.eubo_stderr));
  EXPECT_DOUBLE_EQ(est.kl_bound, est.eubo - est.elbo);
}

TEST(Estimators, SingleDrawIsDegenerate) {
  const BoundTerm t = estimate_elbo(two_state(0.5), weights(3, 1), 1, RngStream(3));
  EXPECT_TRUE(t.degenerate);
  EXPECT_EQ(t.std_error, 0.0);
  ASSERT_EQ(t.log_ratios.size(), 1u);
  EXPECT_EQ(t.mean, t.log_ratios[0]);
}

TEST(Estimators, ZeroCountsArePreconditionErrors) {
  try {
    estimate_kl_bound(two_state(0.5), two_state_reference(0.5), weights(1, 1), 0, 10, RngStream(1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
  EXPECT_THROW(estimate_elbo(two_state(0.5), weights(1, 1), 0, RngStream(1)), Error);
}

TEST(Estimators, ReferenceErrorsPropagate) {
  ReferenceSampler<int> bad;
  bad.sample = [](std::size_t, RngStream&) -> int { throw std::runtime_error("reference failed"); };
  EXPECT_THROW(estimate_eubo(two_state(0.5), bad, weights(1, 1), 5, RngStream(1)),
               std::runtime_error);
}

TEST(Estimators, InvalidPosteriorValues) {
  const UnnormalizedPosterior<int> nan_post{
      [](const int&) { return std::numeric_limits<double>::quiet_NaN(); }};
  try {
    estimate_elbo(two_state(0.5), nan_post, 3, RngStream(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidValue);
  }
  const UnnormalizedPosterior<int> zero_post{[](const int&) { return kNegInf; }};
  try {
    estimate_elbo(two_state(0.5), zero_post, 3, RngStream(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kImpossible);
    EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos);
  }
}

TEST(Estimators, ThreadCountDoesNotChangeResults) {
  const auto a = estimate_kl_bound(two_state(0.3), two_state_reference(0.75), weights(3, 1), 1000,
                                   1000, RngStream(5), 1);
  const auto b = estimate_kl_bound(two_state(0.3), two_state_reference(0.75), weights(3, 1), 1000,
                                   1000, RngStream(5), 4);
  EXPECT_EQ(a.forward_log_ratios, b.forward_log_ratios);
  EXPECT_EQ(a.reference_log_ratios, b.reference_log_ratios);
  EXPECT_EQ(a.kl_bound, b.kl_bound);
}

TEST(TractableAdapter, UniformTwoState) {
  const auto pkg = two_state(0.5);
  RngStream rng(1);
  EXPECT_NEAR(pkg.simulate(rng).log_weight, -0.693147, 1e-6);
  EXPECT_NEAR(pkg.regenerate(0, rng), -0.693147, 1e-6);
}

TEST(TractableAdapter, PointMass) {
  const auto pkg = tractable_adapter<int>([](RngStream&) { return 5; },
                                          [](const int& z) { return z == 5 ? 0.0 : kNegInf; });
  RngStream rng(1);
  const Simulation<int> sim = pkg.simulate(rng);
  EXPECT_EQ(sim.output, 5);
  EXPECT_EQ(sim.log_weight, 0.0);
  try {
    pkg.regenerate(4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kImpossible);
  }
}

TEST(TractableAdapter, StandardNormalDensity) {
  const auto pkg = tractable_adapter<double>([](RngStream& rng) { return rng.normal(); },
                                             [](const double& z) { return normal_log_pdf(z, 0, 1); });
  RngStream rng(1);
  EXPECT_NEAR(pkg.regenerate(0.0, rng), -0.918939, 1e-6);
}

TEST(ErrorKind, MessagesNameTheKind) {
  const Error e(ErrorKind::kWeightCollapse, "all zero");
  EXPECT_EQ(e.kind(), ErrorKind::kWeightCollapse);
  EXPECT_NE(std::string(e.what()).find("all zero"), std::string::npos);
}

}  // namespace
}  // namespace smcdiv
