#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sheetlab {

/// Evaluates fn(k) for k in [0, count) on up to `workers` threads and returns
/// the results in index order. Results never depend on the worker count as
/// long as fn(k) depends only on k; reductions over the returned vector are
/// then order-fixed.
template <class Fn>
auto parallel_map(std::size_t count, int workers, Fn&& fn) {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> results(count);
    const std::size_t threads =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) results[k] = fn(k);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                results[k] = fn(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace sheetlab
