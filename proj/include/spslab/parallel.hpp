#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace spslab {

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads. Results are
/// stored by index, so the output does not depend on scheduling. The first
/// exception thrown by any task is rethrown after all workers join.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(count);
    auto unwrap = [&] {
        std::vector<R> out;
        out.reserve(count);
        for (auto& s : slots) out.push_back(std::move(*s));
        return out;
    };
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
        return unwrap();
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    slots[i].emplace(fn(i));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return unwrap();
}

} // namespace spslab
