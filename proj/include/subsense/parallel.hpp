#pragma once

#include <cstddef>
#include <functional>

namespace subsense {

/// Cap on worker threads used by parallel maps; 0 means hardware concurrency.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Calls body(i) for i in [0, n). Work is split into contiguous blocks; callers write results by index,
/// so output never depends on scheduling. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace subsense
