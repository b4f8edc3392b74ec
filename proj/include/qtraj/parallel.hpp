#pragma once

// Deterministic path-parallel ensemble runner: fn(i) is evaluated for
// i in [0, count) on a small thread pool and landed into slot i, so
// results are identical for every thread count.

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qtraj {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 4;
}

template <typename T, typename Fn>
std::vector<T> run_indexed(std::size_t count, int threads, Fn&& fn) {
    std::vector<T> out(count);
    if (count == 0) return out;
    const int k = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count));
    if (k <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);  // stop handing out work
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace qtraj
