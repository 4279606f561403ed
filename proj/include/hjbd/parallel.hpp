#pragma once

#include <cstddef>
#include <functional>

namespace hjbd {

// Worker-thread cap: HJBD_THREADS if set to a positive integer, else hardware concurrency.
unsigned worker_threads();

// Runs body(i) for i in [0, count) on up to worker_threads() threads. Each index is
// visited exactly once; results must not depend on which thread runs which index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hjbd
