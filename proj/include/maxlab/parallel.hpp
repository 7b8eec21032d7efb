#pragma once

#include <cstddef>
#include <functional>

namespace maxlab {

// Worker cap: min(hardware_concurrency, MAXLAB_THREADS), at least 1.
int thread_budget();

// Static partition of [0, n) across `threads` workers. Results must be written
// into per-index slots so the outcome is identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

} // namespace maxlab
