#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace gdf {

/// Process-wide worker bound. 0 or 1 means run inline.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(begin, end) on contiguous, disjoint sub-ranges of [0, n).
/// Sub-range boundaries depend only on n and the thread count, and fn must
/// write results only into slots it owns, so output order matches input order.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, thread_count()), n);
    if (workers <= 1) {
        if (n > 0) fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

}  // namespace gdf
