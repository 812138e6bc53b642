#pragma once

#include <cstddef>
#include <functional>

namespace seqdf {

// Number of worker threads used when a caller passes workers == 0.
int default_workers();

// Runs fn(rep) for every rep in [0, n) using `workers` threads (0 = default).
// Work is split into contiguous index blocks. Callers must write results into
// per-rep slots keyed by the index, which makes the outcome independent of the
// worker count and of scheduling. The first exception thrown by any worker is
// rethrown on the calling thread after all workers join.
void parallel_for_reps(std::size_t n, int workers,
                       const std::function<void(std::size_t)>& fn);

}  // namespace seqdf
