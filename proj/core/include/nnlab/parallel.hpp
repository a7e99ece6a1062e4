#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nnlab {

// Runs fn(0) .. fn(count - 1) with at most max_concurrency worker threads.
// Work items are claimed from a shared atomic counter, so the assignment of
// items to threads is nondeterministic — callers must make each item
// self-contained (own RNG stream, own output slot) for reproducible results.
// max_concurrency <= 1 runs everything inline on the calling thread.
// The first exception thrown by any item is rethrown after all workers stop.
inline void parallel_for(int64_t count, int max_concurrency,
                         const std::function<void(int64_t)>& fn) {
    if (count <= 0) return;
    if (max_concurrency <= 1 || count == 1) {
        for (int64_t i = 0; i < count; ++i) fn(i);
        return;
    }

    const int workers =
        static_cast<int>(std::min<int64_t>(max_concurrency, count));
    std::atomic<int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Hardware concurrency with a sane floor.
inline int available_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace nnlab
