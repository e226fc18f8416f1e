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

#ifndef SMCDIV_PARALLEL_HPP
#define SMCDIV_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace smcdiv {

/// Runs body(i) for i in [0, n) over up to `threads` workers with a static
/// contiguous partition. If several iterations throw, the exception from the
/// lowest index is rethrown, so error reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            errors[w] = std::current_exception();
            return;
          }
        }
      });
    }
  }
  for (std::size_t w = 0; w < threads; ++w) {
    if (errors[w]) {
      std::rethrow_exception(errors[w]);
    }
  }
}

}  // namespace smcdiv

#endif  // SMCDIV_PARALLEL_HPP
