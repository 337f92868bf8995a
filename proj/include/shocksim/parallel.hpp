#pragma once

#include <cstddef>
#include <functional>

namespace shocksim {

// Worker count: SHOCKSIM_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads.  Results
// must be written to per-index slots so reductions afterwards are ordered.
// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace shocksim
