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

#ifndef SMCDIV_RNG_HPP
#define SMCDIV_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace smcdiv {

/// Counter-based random stream. The output sequence is a pure function of the
/// root seed and the path of split indices, so streams can be derived for any
/// (module, cell, replicate, particle) key without coordinating draw order.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  /// Deterministic child stream. Splitting does not advance the parent.
  [[nodiscard]] RngStream split(std::uint64_t index) const;

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Standard normal (Box-Muller, one output per call).
  double normal();
  /// Uniform on {0, ..., n - 1}.
  std::size_t uniform_index(std::size_t n);

  [[nodiscard]] std::uint64_t root_seed() const noexcept { return root_; }
  [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }
  [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t root, std::uint64_t key, std::vector<std::uint64_t> path);

  std::uint64_t root_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::uint64_t> path_;
};

/// Stream keys used when deriving per-purpose children from a root stream.
namespace stream_key {
inline constexpr std::uint64_t kSlots = 1;
inline constexpr std::uint64_t kOutput = 2;
inline constexpr std::uint64_t kAncestry = 3;
inline constexpr std::uint64_t kBackward = 4;
inline constexpr std::uint64_t kReference = 10;
inline constexpr std::uint64_t kRegenerate = 11;
inline constexpr std::uint64_t kSimulate = 12;
inline constexpr std::uint64_t kChain = 13;
}  // namespace stream_key

}  // namespace smcdiv

#endif  // SMCDIV_RNG_HPP
