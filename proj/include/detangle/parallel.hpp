#pragma once

#include <cstddef>
#include <functional>

namespace detangle {

// Worker cap: DETANGLE_THREADS if set and positive, else hardware concurrency.
std::size_t max_threads();

// Runs body(i) for i in [0, count). Each index writes only its own output
// slot, so results do not depend on the thread count. After all workers
// join, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace detangle
