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

#include "smcdiv/rng.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace smcdiv {
namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSplitGamma = 0xd1b54a32d192ed03ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : root_(seed), key_(mix64(seed ^ kSplitGamma)) {}

RngStream::RngStream(std::uint64_t root, std::uint64_t key, std::vector<std::uint64_t> path)
    : root_(root), key_(key), path_(std::move(path)) {}

RngStream RngStream::split(std::uint64_t index) const {
  std::vector<std::uint64_t> child_path = path_;
  child_path.push_back(index);
  const std::uint64_t child = mix64(mix64(key_) ^ mix64((index + 1) * kSplitGamma));
  return RngStream(root_, child, std::move(child_path));
}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace smcdiv
