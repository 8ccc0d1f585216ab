#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rgap {

/// Process-wide worker count used by the numerical kernels. 0 means
/// hardware_concurrency().
inline unsigned& worker_threads() {
    static unsigned n = 1;
    return n;
}

inline unsigned effective_threads() {
    unsigned n = worker_threads();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs body(begin, end) over [0, count) split into contiguous chunks.
/// Chunk boundaries depend only on count, never on the thread count, so a
/// caller that reduces per-chunk partials in chunk order gets bit-identical
/// results regardless of how many workers ran.
template <class Body>
void parallel_chunks(std::size_t count, std::size_t chunk, Body&& body) {
    if (count == 0) return;
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t nchunks = (count + chunk - 1) / chunk;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(effective_threads(), nchunks));
    auto run = [&](std::size_t c) { body(c, c * chunk, std::min(count, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) run(c);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t c = t; c < nchunks; c += workers) run(c);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Fixed-order sum of per-chunk partials produced by fn(begin, end).
template <class T, class Fn>
T chunked_sum(std::size_t count, std::size_t chunk, Fn&& fn) {
    chunk = std::max<std::size_t>(1, chunk);
    std::vector<T> partial((count + chunk - 1) / chunk, T{});
    parallel_chunks(count, chunk, [&](std::size_t c, std::size_t b, std::size_t e) { partial[c] = fn(b, e); });
    T total{};
    for (const auto& p : partial) total += p;
    return total;
}

}  // namespace rgap
