#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace difflab {

// Worker cap for parallel_for. 0 means hardware concurrency.
void set_max_threads(int n);
int max_threads();

namespace detail {
inline std::atomic<int> g_max_threads{0};
}

inline void set_max_threads(int n) { detail::g_max_threads.store(n < 0 ? 0 : n); }

inline int max_threads() {
    int n = detail::g_max_threads.load();
    if (n == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        n = hc == 0 ? 1 : static_cast<int>(hc);
    }
    return n;
}

namespace detail {
inline thread_local bool g_in_parallel = false;
}

// Runs f(begin, end) over [0, n) split into fixed-size chunks. Chunk
// boundaries depend only on n and chunk_size, never the worker count, so
// per-chunk results (and anything reduced from them in chunk order) are
// bit-identical for any --threads setting. Nested calls run serially.
template <class F>
void parallel_for(std::int64_t n, std::int64_t chunk_size, F&& f) {
    if (n <= 0) return;
    const std::int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
    int workers = max_threads();
    if (workers > n_chunks) workers = static_cast<int>(n_chunks);
    if (workers <= 1 || detail::g_in_parallel) {
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            const std::int64_t b = c * chunk_size;
            f(b, std::min(n, b + chunk_size));
        }
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto run = [&] {
        detail::g_in_parallel = true;
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) break;
            const std::int64_t b = c * chunk_size;
            try {
                f(b, std::min(n, b + chunk_size));
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
                break;
            }
        }
        detail::g_in_parallel = false;
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failed.load() && err) std::rethrow_exception(err);
}

} // namespace difflab
