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

#ifndef SMCDIV_ERROR_HPP
#define SMCDIV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace smcdiv {

enum class ErrorKind {
  kPrecondition,
  kWeightCollapse,
  kSupportViolation,
  kImpossible,
  kInvalidValue,
  kShapeMismatch,
  kConstruction,
  kLimitExceeded,
};

std::string_view to_string(ErrorKind kind);

/// Raised by every sampler, estimator and oracle in the library. The kind lets
/// callers (notably the CLI) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace smcdiv

#endif  // SMCDIV_ERROR_HPP
