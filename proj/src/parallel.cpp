#include "isoprefs/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace isoprefs {

namespace {

unsigned initial_cap() {
    if (const char* env = std::getenv("ISOPREFS_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

std::atomic<unsigned> g_cap{0};

} // namespace

unsigned effective_threads() {
    unsigned cap = g_cap.load(std::memory_order_relaxed);
    if (cap == 0) {
        cap = initial_cap();
        g_cap.store(cap, std::memory_order_relaxed);
    }
    return cap;
}

void set_thread_cap(unsigned n) {
    g_cap.store(n >= 1 ? n : 1, std::memory_order_relaxed);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(effective_threads(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            // fixed block split: worker w owns [lo, hi)
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace isoprefs
