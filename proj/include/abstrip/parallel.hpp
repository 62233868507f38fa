#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace abstrip {

/// Thread count from ABSTRIP_THREADS, else the hardware concurrency.
inline int default_threads() {
    if (const char* env = std::getenv("ABSTRIP_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers (<= 0 means
/// default_threads()). Jobs are claimed in index order; fn must only write
/// state owned by index i. The first exception is rethrown after all workers
/// stop.
template <typename F>
void parallel_for(std::int64_t count, int threads, F&& fn) {
    if (count <= 0) return;
    if (threads <= 0) threads = default_threads();
    const auto workers = static_cast<int>(std::min<std::int64_t>(threads, count));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace abstrip
