#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace predkit {

/// Runs fn(i) for every i in [0, count) across `workers` threads. Each item
/// must write only its own output slot; callers reduce in index order
/// afterwards, so results cannot depend on scheduling or worker count.
/// If items throw, the exception from the lowest index is rethrown.
inline void parallel_for_slots(long long count, int workers,
                               const std::function<void(long long)>& fn) {
    if (count <= 0) return;
    if (workers < 1) workers = 1;

    if (workers == 1) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<long long> next{0};
    auto worker = [&] {
        for (;;) {
            const long long i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(std::min<long long>(workers, count));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace predkit
