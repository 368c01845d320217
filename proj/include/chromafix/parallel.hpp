#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace chromafix {

// Number of worker threads used by the parallel stages. 0 = hardware concurrency.
void set_thread_count(unsigned count) noexcept;
unsigned thread_count() noexcept;

// Calls fn(i) for every i in [begin, end), split into contiguous blocks over
// worker threads. fn must only write to state owned by index i. The first
// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn)
{
    const int n = end - begin;
    if (n <= 0) return;
    const int workers = std::min<int>(static_cast<int>(thread_count()), n);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
        const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
        threads.emplace_back([&, lo, hi, w] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace chromafix
