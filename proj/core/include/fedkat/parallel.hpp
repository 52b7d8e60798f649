// Copyright 2026 The fedkat Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FEDKAT_PARALLEL_HPP_
#define FEDKAT_PARALLEL_HPP_

#include <functional>
#include <thread>
#include <vector>

namespace fedkat {

// Runs fn(0), ..., fn(count-1), split over `threads` OS threads.
//
// fn(i) must only write state owned by index i (its own output slot, its own
// RNG stream).  Under that contract the result is identical for every thread
// count, so traces stay byte-for-byte reproducible whether worker loops run
// sequentially or in parallel; any cross-worker reduction happens after the
// join, in index order, on the caller's thread.
inline void parallel_for(int threads, int count,
                         const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([t, workers, count, &fn] {
      for (int i = t; i < count; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fedkat

#endif  // FEDKAT_PARALLEL_HPP_
