#pragma once

#include <cstddef>
#include <functional>

namespace cqlab {

// Worker count from CQLAB_THREADS; unset or invalid means hardware concurrency.
unsigned thread_count();

// Calls body(begin, end) on contiguous chunks of [0, n). Chunks may run
// concurrently; callers write results by index so the outcome does not depend
// on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace cqlab
