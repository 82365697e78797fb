#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace vblob {

namespace detail {
inline std::atomic<int>& thread_count_storage() {
    static std::atomic<int> n{0};
    return n;
}
}  // namespace detail

/// Worker threads used by grid fills and target maps. 0 or 1 means serial
/// deterministic mode.
inline void set_thread_count(int n) { detail::thread_count_storage().store(std::max(0, n)); }
inline int thread_count() { return detail::thread_count_storage().load(); }
inline bool serial_mode() { return thread_count() <= 1; }

/// Calls fn(i) for every i in [0, n). Each index is written by exactly one
/// worker, so results do not depend on the thread count as long as fn(i) only
/// touches slot i.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = thread_count();
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    const std::size_t chunk = (n + w - 1) / w;
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
}

}  // namespace vblob
