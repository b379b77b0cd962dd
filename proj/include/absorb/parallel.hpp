#pragma once

#include <cstddef>
#include <functional>

namespace absorb {

/// Worker count: ABSORB_LAB_THREADS when set and positive, else the hardware
/// concurrency (at least 1).
unsigned worker_count();

/// Splits [0, n) into contiguous chunks, one per worker, and runs
/// body(begin, end, worker) on each. Blocks until all chunks finish and
/// rethrows the first exception raised by a worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t, unsigned)>& body,
                  unsigned workers = 0);

}  // namespace absorb
