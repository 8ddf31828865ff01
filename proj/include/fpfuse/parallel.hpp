#pragma once

#include <cstddef>
#include <functional>

namespace fpfuse {

// Worker cap: FPFUSE_THREADS if set and positive, else hardware concurrency.
std::size_t default_threads();

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace fpfuse
