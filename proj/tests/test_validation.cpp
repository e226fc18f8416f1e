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

#include "smcdiv/validation.hpp"

namespace smcdiv {
namespace {

TEST(Validation, ReducedSuitePasses) {
  ValidationOptions options;
  options.scale = 0.02;
  for (const CheckResult& r : run_validation_suite(options, RngStream(20161))) {
    EXPECT_TRUE(r.passed) << format_check(r);
  }
}

TEST(Validation, NegativeControlIsCaught) {
  bool saw_control = false;
  for (const CheckResult& r : check_kernels(true)) {
    if (r.name == "balance:negative-control") {
      saw_control = true;
      EXPECT_FALSE(r.passed) << format_check(r);
    } else {
      EXPECT_TRUE(r.passed) << format_check(r);
    }
  }
  EXPECT_TRUE(saw_control);
}

TEST(Validation, FormatsOneLine) {
  const CheckResult r{"demo", 0.5, 1.0, true, "detail"};
  EXPECT_EQ(format_check(r), "PASS demo: measured=0.5 tolerance=1 (detail)");
}

}  // namespace
}  // namespace smcdiv
