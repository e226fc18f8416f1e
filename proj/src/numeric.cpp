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

#include "smcdiv/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace smcdiv {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return kNegInf;
  }
  const double max = *std::max_element(values.begin(), values.end());
  if (max == kNegInf) {
    return kNegInf;
  }
  if (std::isinf(max)) {
    return max;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - max);
  }
  return max + std::log(sum);
}

double log_mean_exp(std::span<const double> values) {
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary out;
  out.n = values.size();
  if (values.empty()) {
    return out;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(out.n);
  if (out.n == 1) {
    out.degenerate = true;
    return out;
  }
  double ss = 0.0;
  for (double v : values) {
    ss += (v - out.mean) * (v - out.mean);
  }
  const double var = ss / static_cast<double>(out.n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(out.n));
  return out;
}

double normal_log_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * d * d / variance;
}

}  // namespace smcdiv
