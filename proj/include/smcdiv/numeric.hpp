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

#ifndef SMCDIV_NUMERIC_HPP
#define SMCDIV_NUMERIC_HPP

#include <cstddef>
#include <limits>
#include <span>

namespace smcdiv {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(values))) with the maximum factored out. Returns -inf for an
/// empty range or when every entry is -inf.
double log_sum_exp(std::span<const double> values);

/// log((1/n) sum(exp(values))).
double log_mean_exp(std::span<const double> values);

/// Sample mean and standard error (sample standard deviation / sqrt(n)).
struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  /// True when n == 1 and the standard error is reported as 0 by convention.
  bool degenerate = false;
};

SampleSummary summarize(std::span<const double> values);

double normal_log_pdf(double x, double mean, double variance);

}  // namespace smcdiv

#endif  // SMCDIV_NUMERIC_HPP
