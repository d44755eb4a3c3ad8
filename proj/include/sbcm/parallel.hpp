#pragma once

#include <cstddef>
#include <functional>

namespace sbcm {

/// Worker count from SBCM_WORKERS, else the hardware concurrency (at least 1).
int default_worker_count();

/// Calls body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out in increasing order; the first exception thrown by any call is
/// rethrown after all workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace sbcm
