#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace distgeo {

/// Chunked parallel loop over [begin, end). Each index is processed exactly
/// once; callers must only write to per-index storage so results do not
/// depend on the schedule. threads <= 1 runs inline; threads == 0 uses the
/// hardware concurrency.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& body) {
    const int n = end - begin;
    if (n <= 0) return;
    if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = begin + t * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace distgeo
