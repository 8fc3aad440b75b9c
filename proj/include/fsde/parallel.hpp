#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace fsde {

/// Number of workers for `threads` requested (0 = hardware concurrency).
inline unsigned resolve_threads(int threads, std::size_t n_items) {
    unsigned hw = std::thread::hardware_concurrency();
    unsigned t = threads > 0 ? static_cast<unsigned>(threads) : (hw ? hw : 1u);
    if (n_items < t) t = static_cast<unsigned>(std::max<std::size_t>(n_items, 1));
    return t;
}

/// Runs fn(begin, end) over contiguous chunks of [0, n). Work items must be
/// independent; results must not depend on the partition.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    unsigned t = resolve_threads(threads, n);
    if (t <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        std::size_t begin = static_cast<std::size_t>(w) * chunk;
        if (begin >= n) break;
        std::size_t end = std::min(n, begin + chunk);
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

/// Fixed-order pairwise sum. Deterministic for a given input order, so
/// reductions stay independent of worker count when per-item values are
/// materialized first.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace fsde
