#pragma once

#include <cstdint>
#include <functional>

namespace csisense {

// Global worker count. 0 or negative selects std::thread::hardware_concurrency.
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) over a static partition of [0, n). Each index is
// handled by exactly one worker and every worker runs its chunk serially,
// so results do not depend on the worker count.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace csisense
