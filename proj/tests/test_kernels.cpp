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
#include <vector>

#include "smcdiv/error.hpp"
#include "smcdiv/kernels.hpp"
#include "support.hpp"

namespace smcdiv {
namespace {

const std::vector<int> kThree = {0, 1, 2};

std::function<double(const int&)> one_two_three() {
  return [](const int& x) { return std::log(static_cast<double>(x + 1)); };
}

Proposal<int> uniform_three() {
  Proposal<int> p;
  p.sample = [](const int&, RngStream& rng) { return static_cast<int>(rng.uniform_index(3)); };
  p.log_density = [](const int&, const int&) { return -std::log(3.0); };
  p.support = [](const int&) { return kThree; };
  return p;
}

TEST(MhKernel, AcceptanceProbabilities) {
  const std::function<double(const int&)> target = [](const int& x) {
    return x == 0 ? 0.0 : std::log(2.0);
  };
  const Proposal<int> p = uniform_three();
  EXPECT_EQ(mh_log_accept(target, p, true, 0, 1), 0.0);
  EXPECT_NEAR(std::exp(mh_log_accept(target, p, true, 1, 0)), 0.5, 1e-15);
}

TEST(MhKernel, UniformProposalSatisfiesFlow) {
  RngStream rng(1);
  const auto k = mh_kernel(one_two_three(), uniform_three(), true);
  const auto report = check_detailed_balance(k, one_two_three(), kThree, rng);
  EXPECT_TRUE(report.exact);
  EXPECT_LE(report.max_violation, 1e-12);
  // Rows are probability distributions.
  for (int from : kThree) {
    double total = 0.0;
    for (int to : kThree) {
      total += std::exp(k.log_transition(to, from));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(MhKernel, AsymmetricProposalWithoutReturnPathIsAnError) {
  Proposal<int> p;
  p.sample = [](const int& x, RngStream&) { return x + 1; };
  p.log_density = [](const int& to, const int& from) { return to == from + 1 ? 0.0 : kNegInf; };
  const auto k = mh_kernel<int>([](const int&) { return 0.0; }, p, false);
  RngStream rng(1);
  try {
    k.step(0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSupportViolation);
  }
}

TEST(MhKernel, EmpiricalFallbackAcceptsCorrectKernel) {
  auto k = mh_kernel(one_two_three(), uniform_three(), true);
  k.log_transition = nullptr;
  RngStream rng(2);
  const auto report = check_detailed_balance(k, one_two_three(), kThree, rng);
  EXPECT_FALSE(report.exact);
  EXPECT_TRUE(report.passed(1e-12));
  EXPECT_EQ(report.degrees_of_freedom, 3u);
}

TEST(DetailedBalance, IdentityHasNoViolation) {
  RngStream rng(3);
  const auto report = check_detailed_balance(identity_kernel<int>(), one_two_three(), kThree, rng);
  EXPECT_EQ(report.max_violation, 0.0);
}

TEST(DetailedBalance, AcceptAlwaysKernelIsCaught) {
  DetailedBalanceKernel<int> broken;
  broken.step = uniform_three().sample;
  broken.log_transition = [](const int&, const int&) { return -std::log(3.0); };
  RngStream rng(4);
  const auto exact = check_detailed_balance(broken, one_two_three(), kThree, rng);
  EXPECT_GT(exact.max_violation, 1e-3);
  EXPECT_FALSE(exact.passed(1e-12));

  broken.log_transition = nullptr;
  const auto empirical = check_detailed_balance(broken, one_two_three(), kThree, rng);
  EXPECT_FALSE(empirical.passed(1e-12));
}

TEST(DetailedBalance, SpaceLimits) {
  RngStream rng(5);
  EXPECT_THROW(check_detailed_balance(identity_kernel<int>(), one_two_three(), {}, rng), Error);
}

TEST(GibbsKernel, TwoPointFrequencies) {
  const SiteConditional<int> cond = [](const int&, std::size_t) {
    return std::vector<std::pair<int, double>>{{0, 0.25}, {1, 0.75}};
  };
  const auto k = gibbs_site_kernel<int>(0, cond);
  RngStream rng(6);
  int x = 0;
  double ones = 0.0;
  const double n = 100000;
  for (int i = 0; i < n; ++i) {
    x = k.step(x, rng);
    ones += x;
  }
  EXPECT_LT(testing::binomial_sigmas(ones, n, 0.75), 3.0);
}

TEST(GibbsKernel, DeterministicConditional) {
  const SiteConditional<int> cond = [](const int&, std::size_t) {
    return std::vector<std::pair<int, double>>{{1, 1.0}, {0, 0.0}};
  };
  const auto k = gibbs_site_kernel<int>(0, cond);
  RngStream rng(7);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(k.step(i % 2, rng), 1);
  }
}

TEST(GibbsKernel, UnnormalizedConditionalIsRejected) {
  const SiteConditional<int> cond = [](const int&, std::size_t) {
    return std::vector<std::pair<int, double>>{{0, 0.5}, {1, 0.6}};
  };
  const auto k = gibbs_site_kernel<int>(0, cond);
  RngStream rng(8);
  try {
    k.step(0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidValue);
  }
}

TEST(GibbsKernel, ConditionalFromTargetBalances) {
  // Two binary sites, target proportional to 1 + x0 + 2 x1 + x0 x1.
  const std::vector<std::vector<int>> space = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const std::function<double(const std::vector<int>&)> target = [](const std::vector<int>& x) {
    return std::log(1.0 + x[0] + 2.0 * x[1] + x[0] * x[1]);
  };
  const std::function<std::vector<std::vector<int>>(const std::vector<int>&, std::size_t)>
      candidates = [](const std::vector<int>& x, std::size_t site) {
        std::vector<int> a = x;
        std::vector<int> b = x;
        a[site] = 0;
        b[site] = 1;
        return std::vector<std::vector<int>>{a, b};
      };
  RngStream rng(9);
  for (std::size_t site = 0; site < 2; ++site) {
    const auto k = gibbs_site_kernel<std::vector<int>>(
        site, conditional_from_target(target, candidates));
    EXPECT_LE(check_detailed_balance(k, target, space, rng).max_violation, 1e-12);
  }
}

TEST(CycleCollapse, EmptyCycleIsIdentity) {
  const auto c = cycle_collapse<int>({});
  RngStream rng(1);
  EXPECT_EQ(c.forward(7, rng), 7);
  EXPECT_EQ(c.backward(7, rng), 7);
}

TEST(CycleCollapse, ForwardInOrderBackwardReversed) {
  DetailedBalanceKernel<int> twice;
  twice.step = [](const int& x, RngStream&) { return 2 * x; };
  DetailedBalanceKernel<int> plus_one;
  plus_one.step = [](const int& x, RngStream&) { return x + 1; };
  RngStream rng(1);
  const auto c = cycle_collapse<int>({twice, plus_one});
  EXPECT_EQ(c.forward(1, rng), 3);
  EXPECT_EQ(c.backward(1, rng), 4);
  const auto same = cycle_collapse<int>({twice, plus_one}, false);
  EXPECT_EQ(same.backward(1, rng), 3);
}

TEST(CycleCollapse, MixedTargetsAreRejected) {
  auto a = identity_kernel<int>(1);
  auto b = identity_kernel<int>(2);
  try {
    cycle_collapse<int>({a, b});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConstruction);
  }
}

TEST(ChainTransition, MatchesMatrixProduct) {
  const auto k = mh_kernel(one_two_three(), uniform_three(), true);
  for (int from : kThree) {
    for (int to : kThree) {
      double expected = 0.0;
      for (int mid : kThree) {
        expected += std::exp(k.log_transition(mid, from) + k.log_transition(to, mid));
      }
      EXPECT_NEAR(std::exp(chain_log_transition<int>({k, k}, kThree, to, from)), expected, 1e-14);
    }
  }
  EXPECT_THROW(chain_log_transition<int>({k}, kThree, 0, 5), Error);
}

TEST(ChainTransition, PalindromicCycleBalances) {
  // d1 d2 d1 is reversible when each d_i is.
  Proposal<int> step_one;
  step_one.sample = [](const int& x, RngStream& rng) { return (x + (rng.uniform() < 0.5 ? 1 : 2)) % 3; };
  step_one.log_density = [](const int& to, const int& from) { return to == from ? kNegInf : std::log(0.5); };
  step_one.support = [](const int&) { return kThree; };
  const auto a = mh_kernel(one_two_three(), uniform_three(), true);
  const auto b = mh_kernel(one_two_three(), step_one, false);
  DetailedBalanceKernel<int> cycle;
  cycle.step = [](const int& x, RngStream&) { return x; };
  cycle.log_transition = [a, b](const int& to, const int& from) {
    return chain_log_transition<int>({a, b, a}, kThree, to, from);
  };
  RngStream rng(1);
  EXPECT_LE(check_detailed_balance(cycle, one_two_three(), kThree, rng).max_violation, 1e-12);
}

}  // namespace
}  // namespace smcdiv
