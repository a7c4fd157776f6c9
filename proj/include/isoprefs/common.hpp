#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>

namespace isoprefs {

// Typed failures. Everything derives from std::runtime_error so the CLI can
// map them onto its exit codes in one place.
struct DegenerateSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SamplingExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnderflowViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateLabels : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace instrument {

// Process-wide counters for claims the type system cannot express:
// RuzHash trees must be built without a single preference-distance
// evaluation, and Sliding-PIF must stay inside its matrix memory budget.
// Tests reset these, run a pipeline, and inspect the result.

std::uint64_t distance_calls() noexcept;
void count_distance_call() noexcept;
void reset_distance_calls() noexcept;

std::int64_t matrix_bytes_now() noexcept;
std::int64_t matrix_bytes_peak() noexcept;
void add_matrix_bytes(std::int64_t delta) noexcept;
void reset_matrix_peak() noexcept;

} // namespace instrument
} // namespace isoprefs
