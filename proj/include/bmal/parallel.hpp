// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BMAL_PARALLEL_HPP
#define BMAL_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bmal
{
    // Runs fn(i) for i in [0, n) on up to `threads` workers using contiguous chunks.
    // fn must only write to per-index state. The first exception is rethrown.
    template <typename Fn>
    void parallel_for(std::size_t n, int threads, Fn &&fn)
    {
        const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
        if (workers <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (n + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w)
            {
                const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
                if (begin >= end)
                    break;
                pool.emplace_back([&, begin, end]
                                  {
                    try
                    {
                        for (std::size_t i = begin; i < end; ++i)
                            fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!error)
                            error = std::current_exception();
                    } });
            }
        }
        if (error)
            std::rethrow_exception(error);
    }
}

#endif
