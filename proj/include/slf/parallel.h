#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace slf {

int thread_count();
void set_thread_count(int n);

// Runs f(i) for i in [0, n). Work is split into contiguous ranges, one per
// thread. Callers must write results into per-index slots; no locking is
// provided. With disjoint writes the result is identical for any thread count.
template <typename F>
void parallel_for(int64_t n, F&& f) {
    int nt = thread_count();
    if (nt <= 1 || n < 2) {
        for (int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    if (int64_t(nt) > n) nt = int(n);
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        int64_t begin = n * t / nt;
        int64_t end = n * (t + 1) / nt;
        workers.emplace_back([=, &f] {
            for (int64_t i = begin; i < end; ++i) f(i);
        });
    }
    for (auto& w : workers) w.join();
}

// Reduction helper: splits [0, n) into num_chunks fixed ranges regardless of
// thread count, evaluates f(chunk_index, begin, end) in parallel, and leaves
// the caller to merge per-chunk partials in chunk order. This keeps floating
// point reductions bit-identical across thread counts.
template <typename F>
void parallel_chunks(int64_t n, int num_chunks, F&& f) {
    if (num_chunks < 1) num_chunks = 1;
    if (int64_t(num_chunks) > n && n > 0) num_chunks = int(n);
    parallel_for(num_chunks, [&](int64_t c) {
        int64_t begin = n * c / num_chunks;
        int64_t end = n * (c + 1) / num_chunks;
        f(int(c), begin, end);
    });
}

} // namespace slf
