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

#include "smcdiv/error.hpp"

namespace smcdiv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kPrecondition:
      return "precondition";
    case ErrorKind::kWeightCollapse:
      return "weight-collapse";
    case ErrorKind::kSupportViolation:
      return "support-violation";
    case ErrorKind::kImpossible:
      return "impossible";
    case ErrorKind::kInvalidValue:
      return "invalid-value";
    case ErrorKind::kShapeMismatch:
      return "shape-mismatch";
    case ErrorKind::kConstruction:
      return "construction";
    case ErrorKind::kLimitExceeded:
      return "limit-exceeded";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace smcdiv
