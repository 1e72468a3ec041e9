#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace sofic {

/// Runs fn(i) for i in [0, n) on `threads` workers and returns the results in
/// index order. Work is fetched from an atomic counter, so the assignment of
/// chunks to threads varies but the combined result never does: determinism
/// comes from chunk contents depending only on the chunk index.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<T> results(n);
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                results[i] = fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace sofic
