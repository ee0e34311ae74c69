#pragma once

#include <functional>

namespace loca {

// Worker cap: LOCA_THREADS when set, hardware concurrency otherwise.
int max_threads();

// Runs fn over [begin, end) split into contiguous blocks, one per worker.
// Each index is processed by exactly one worker, so writers to disjoint
// rows/elements stay deterministic under any thread count.
void parallel_for(long begin, long end, const std::function<void(long)>& fn);

} // namespace loca
