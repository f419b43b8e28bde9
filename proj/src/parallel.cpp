// Copyright 2026 The lipcert Authors.
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

#include "lipcert/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lipcert {

std::size_t default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(
    std::size_t count, std::size_t grain, std::size_t threads,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  if (threads == 0) threads = default_thread_count();
  const std::size_t chunks = (count + grain - 1) / grain;
  threads = std::min(threads, chunks);

  if (threads <= 1) {
    for (std::size_t begin = 0; begin < count; begin += grain) {
      body(begin, std::min(count, begin + grain), 0);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&](std::size_t id) {
    try {
      for (;;) {
        const std::size_t chunk = next.fetch_add(1);
        if (chunk >= chunks) return;
        const std::size_t begin = chunk * grain;
        body(begin, std::min(count, begin + grain), id);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(chunks);
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t id = 1; id < threads; ++id) pool.emplace_back(worker, id);
  worker(0);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lipcert
