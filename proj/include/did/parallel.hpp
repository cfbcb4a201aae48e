#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace did {

inline std::size_t default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min<unsigned>(hw, 8);
}

// Runs fn(i) for i in [0, count). Each index must write only to its own
// output slot, so results are identical to the sequential order.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         std::size_t num_threads = default_thread_count()) {
    if (count == 0) return;
    num_threads = std::min(num_threads, count);
    if (num_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(num_threads);
    for (std::size_t t = 0; t < num_threads; ++t) {
        workers.emplace_back([&, t]() {
            for (std::size_t i = t; i < count; i += num_threads) fn(i);
        });
    }
    for (std::thread& worker : workers) worker.join();
}

} // namespace did
