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

#ifndef SMCDIV_TESTS_SUPPORT_HPP
#define SMCDIV_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "smcdiv/smc.hpp"

namespace smcdiv::testing {

/// Upper-tail p-value of Pearson's statistic for counts against probabilities.
inline double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (double c : counts) {
    total += c;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = total * probs[i];
    stat += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// |observed frequency - p| in binomial standard deviations.
inline double binomial_sigmas(double count, double total, double p) {
  return std::abs(count / total - p) / std::sqrt(p * (1.0 - p) / total);
}

/// T = 1, N = 1 on {0, 1}: k_1 uniform, target p~ = (1, 1), identity output
/// kernels. Returns log w = log 0.5 for every run.
inline SmcConfig<int> trivial_config() {
  SmcConfig<int> cfg;
  cfg.steps = 1;
  cfg.particles = 1;
  cfg.init = [](RngStream& rng) { return static_cast<int>(rng.uniform_index(2)); };
  cfg.log_init_weight = [](const int&) { return std::log(2.0); };
  cfg.final_move.forward = [](const int& x, RngStream&) { return x; };
  cfg.final_move.backward = [](const int& z, RngStream&) { return z; };
  cfg.final_move.log_weight = [](const int&, const int&) { return 0.0; };
  SmcDensities<int> d;
  auto identity = [](std::size_t, const int& to, const int& from) {
    return to == from ? 0.0 : kNegInf;
  };
  d.log_target = [](std::size_t, const int&) { return 0.0; };
  d.log_init = [](const int&) { return std::log(0.5); };
  d.log_forward = identity;
  d.log_backward = identity;
  cfg.densities = d;
  return cfg;
}

}  // namespace smcdiv::testing

#endif  // SMCDIV_TESTS_SUPPORT_HPP
