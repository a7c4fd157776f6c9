#include "isoprefs/common.hpp"

namespace isoprefs::instrument {

namespace {
std::atomic<std::uint64_t> g_distance_calls{0};
std::atomic<std::int64_t> g_matrix_bytes{0};
std::atomic<std::int64_t> g_matrix_peak{0};
} // namespace

std::uint64_t distance_calls() noexcept {
    return g_distance_calls.load(std::memory_order_relaxed);
}

void count_distance_call() noexcept {
    g_distance_calls.fetch_add(1, std::memory_order_relaxed);
}

void reset_distance_calls() noexcept {
    g_distance_calls.store(0, std::memory_order_relaxed);
}

std::int64_t matrix_bytes_now() noexcept {
    return g_matrix_bytes.load(std::memory_order_relaxed);
}

std::int64_t matrix_bytes_peak() noexcept {
    return g_matrix_peak.load(std::memory_order_relaxed);
}

void add_matrix_bytes(std::int64_t delta) noexcept {
    std::int64_t now = g_matrix_bytes.fetch_add(delta, std::memory_order_relaxed) + delta;
    std::int64_t peak = g_matrix_peak.load(std::memory_order_relaxed);
    while (now > peak &&
           !g_matrix_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
}

void reset_matrix_peak() noexcept {
    g_matrix_peak.store(g_matrix_bytes.load(std::memory_order_relaxed),
                        std::memory_order_relaxed);
}

} // namespace isoprefs::instrument
