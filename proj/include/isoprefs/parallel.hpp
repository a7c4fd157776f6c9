#pragma once

#include <cstddef>
#include <functional>

namespace isoprefs {

// Process-wide worker cap. Starts from the ISOPREFS_THREADS environment
// variable, else the hardware count; the CLI's --threads overrides it.
unsigned effective_threads();
void set_thread_cap(unsigned n);

// Runs fn(i) for i in [0, n). Work is split into fixed contiguous blocks so
// results are identical no matter how many workers run; fn must only write
// state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace isoprefs
