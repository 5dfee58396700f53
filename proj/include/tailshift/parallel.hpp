#pragma once

#include <cstddef>
#include <functional>

namespace tailshift {

// Number of worker threads used when a caller passes threads = 0.
unsigned default_threads() noexcept;

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
// Work items are claimed dynamically, so callers must write results into
// index-addressed storage; any reduction happens afterwards in index order.
// The first exception thrown by a body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace tailshift
