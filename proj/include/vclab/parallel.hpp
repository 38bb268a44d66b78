#pragma once

#include <cstddef>
#include <functional>

namespace vclab {

// Number of worker threads for in-kernel parallelism. Read once from
// VCLAB_THREADS (default: hardware concurrency, capped at 16).
int thread_count();

// Runs fn(begin, end) over a static partition of [0, n). Every index is
// owned by exactly one chunk and each chunk's work is sequential, so
// results are bitwise identical for any thread count. Falls through to a
// direct call when n is small or only one thread is configured.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace vclab
