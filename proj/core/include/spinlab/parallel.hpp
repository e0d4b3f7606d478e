#pragma once

#include <cstddef>
#include <functional>

namespace spinlab {

// Worker count: min(hardware, SPINLAB_THREADS) with SPINLAB_THREADS=0/unset
// meaning "all hardware threads".
std::size_t worker_count();

// Runs fn(i) for i in [0, count) across the worker pool. Each index must be
// independent (replica-level parallelism with per-replica rng streams);
// results are written by index so the outcome is identical for any worker
// count. Rethrows the first exception raised by any index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace spinlab
