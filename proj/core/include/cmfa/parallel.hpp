#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace cmfa {

/// Worker-count cap used by parallel_chunks. 0 or negative restores the
/// hardware default. Outputs never depend on this value: every parallel
/// loop in the library writes disjoint slots.
void set_max_threads(int n);
int max_threads();

namespace detail {

/// Splits [begin, end) into contiguous chunks and runs fn(chunk_begin,
/// chunk_end) on up to max_threads() threads. fn must only write state
/// owned by its own chunk.
template <class Fn>
void parallel_chunks(std::int64_t begin, std::int64_t end, Fn&& fn) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    const int workers = static_cast<int>(
        std::min<std::int64_t>(n, static_cast<std::int64_t>(max_threads())));
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers) - 1);
    std::exception_ptr first_error;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const std::int64_t step = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = begin + step * w;
        const std::int64_t hi = std::min(end, lo + step);
        if (lo >= hi) break;
        auto run = [&fn, &errors, w, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        };
        if (w + 1 == workers)
            run(); // last chunk on the calling thread
        else
            threads.emplace_back(run);
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) { first_error = e; break; }
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail
} // namespace cmfa
