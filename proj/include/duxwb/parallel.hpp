// Copyright 2026 The duxwb Authors
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

namespace duxwb {

/// Worker count: hardware concurrency, capped by DUXWB_THREADS when set.
int thread_count();

/// Runs fn(i) for i in [0, n) across up to thread_count() workers using
/// contiguous static chunks. Callers write results into per-index slots and
/// reduce afterwards in index order, which keeps results independent of the
/// worker count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int max_threads = 0);

}  // namespace duxwb
