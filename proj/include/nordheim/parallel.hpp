#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace nordheim {

/// Process-wide worker count for collision and diagnostics kernels. Results do
/// not depend on it: work is split into a fixed number of blocks whose partial
/// results are combined in block order.
void set_worker_threads(unsigned n);
unsigned worker_threads();

/// Calls fn(b) for every b in [0, n_blocks), distributing blocks over the
/// configured workers. fn must only write state owned by block b.
template <class Fn>
void parallel_blocks(std::size_t n_blocks, Fn&& fn) {
    const unsigned threads = std::min<std::size_t>(worker_threads(), n_blocks);
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t b = t; b < n_blocks; b += threads) fn(b);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace nordheim
