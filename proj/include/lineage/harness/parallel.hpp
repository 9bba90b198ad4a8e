#pragma once

// Seed/member-level worker pool. Each unit of work must be independent and
// internally deterministic; callers merge results in a fixed order so the
// thread schedule never shows up in any output.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lineage {

inline int thread_count() {
    if (const char* env = std::getenv("LINEAGE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for(int count, Fn&& fn, int threads = thread_count()) {
    if (count <= 0) return;
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lineage
