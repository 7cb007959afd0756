// Copyright 2026 The wigphon project developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied. See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

/// @file
///
/// Block-parallel loop over an index range. Results are bitwise
/// independent of the thread count: each index writes only its own slot.

#include <exception>
#include <thread>
#include <vector>

namespace wigphon {

template <class F>
void parallel_for(int n, int num_threads, F&& body) {
    if (n <= 0)
        return;
    if (num_threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    const int workers = std::min(num_threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(size_t(workers));
    pool.reserve(size_t(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += workers)
                    body(i);
            } catch (...) {
                errors[size_t(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace wigphon
