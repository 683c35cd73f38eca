#pragma once

#include <cstddef>
#include <functional>

namespace se2lio {

// Worker count: min(hardware, SE2LIO_THREADS if set, explicit cap if > 0).
int thread_count(int cap = 0);

// Splits [0, n) into contiguous chunks, one worker each. Workers must write
// only to disjoint, index-addressed slots; results are then independent of the
// thread count by construction (no shared accumulators, no reductions here).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int cap = 0);

}  // namespace se2lio
