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

#ifndef SMCDIV_DATASET_HPP
#define SMCDIV_DATASET_HPP

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace smcdiv {

/// Plain-text dataset: one observation per line, whitespace-separated reals.
/// Blank lines and lines starting with '#' are skipped. Every observation must
/// have exactly `columns` finite values; errors name the offending line.
std::vector<std::vector<double>> read_dataset(std::istream& in, std::size_t columns,
                                              const std::string& source = "<stream>");

std::vector<std::vector<double>> load_dataset(const std::string& path, std::size_t columns);

}  // namespace smcdiv

#endif  // SMCDIV_DATASET_HPP
