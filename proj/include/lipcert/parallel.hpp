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

#pragma once

#include <cstddef>
#include <functional>

namespace lipcert {

/// Runs `body(chunk_begin, chunk_end, worker)` over [0, count) split into
/// contiguous chunks of `grain` items. Chunks are handed to at most `threads`
/// workers; `threads <= 1` runs inline. Callers must write only to per-item or
/// per-worker storage so the result does not depend on scheduling.
void parallel_for(
    std::size_t count, std::size_t grain, std::size_t threads,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Worker count used when the caller passes 0.
std::size_t default_thread_count();

}  // namespace lipcert
