#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace bend {

// Worker count: BEND_THREADS env var caps it, default hardware concurrency.
inline int worker_count() {
    static int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("BEND_THREADS")) {
            int cap = std::atoi(env);
            if (cap >= 1 && cap < hw) hw = cap;
        }
        return hw;
    }();
    return n;
}

// Chunked parallel loop over [begin, end). Each index is processed exactly once
// and writes only to its own slots, so results are bit-identical for any
// worker count.
inline void parallel_for(long begin, long end, const std::function<void(long)>& body) {
    const long count = end - begin;
    if (count <= 0) return;
    const int workers = worker_count();
    if (workers == 1 || count < 256) {
        for (long i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<long> next{begin};
    const long chunk = 256;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                long lo = next.fetch_add(chunk);
                if (lo >= end) break;
                long hi = lo + chunk < end ? lo + chunk : end;
                for (long i = lo; i < hi; ++i) body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace bend
