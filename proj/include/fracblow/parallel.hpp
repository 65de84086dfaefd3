#ifndef FRACBLOW_PARALLEL_HPP
#define FRACBLOW_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace fracblow {

// Thread cap: FRACBLOW_THREADS if set, hardware concurrency otherwise.
int thread_budget();

// Runs body(i) for i in [0, n) on up to thread_budget() threads. Results must
// be written to per-index slots; the partitioning is static so runs are
// deterministic regardless of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace fracblow

#endif
