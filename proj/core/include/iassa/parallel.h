// Copyright 2026 The IASSA Authors. All Rights Reserved.
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

#ifndef IASSA_PARALLEL_H_
#define IASSA_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace iassa {

// Splits [0, count) into at most `threads` contiguous chunks and calls
// fn(begin, end) for each, one chunk per thread. Chunk boundaries depend only
// on (count, threads), so callers that write disjoint output ranges get the
// same result for any thread count. The first exception thrown by a worker is
// rethrown on the calling thread after all workers joined.
template <typename Fn>
void ParallelFor(size_t count, int threads, Fn&& fn) {
  if (count == 0) return;
  const size_t workers =
      std::clamp<size_t>(threads < 1 ? 1 : static_cast<size_t>(threads), 1,
                         count);
  if (workers == 1) {
    fn(size_t{0}, count);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const size_t base = count / workers;
    const size_t extra = count % workers;
    size_t begin = 0;
    for (size_t w = 0; w < workers; ++w) {
      const size_t end = begin + base + (w < extra ? 1 : 0);
      pool.emplace_back([&, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
      begin = end;
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace iassa

#endif  // IASSA_PARALLEL_H_
