#pragma once

#include <cstddef>
#include <functional>

namespace subergm {

// Worker count used when a caller passes 0 (hardware concurrency, at least 1).
unsigned default_workers();

// Runs fn(0), ..., fn(count-1) on a small thread pool. Items must be
// independent; each writes only its own output slot, so results do not depend
// on the worker count. The first exception thrown by any item is rethrown
// after all workers have joined.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace subergm
