#pragma once

#include <cstdint>
#include <functional>

namespace modev {

/// Worker count used when a caller passes threads <= 0.
int default_thread_count();

/// Calls body(index, worker) for index in [0, count) on `threads` workers.
/// Workers claim indices dynamically, so callers that need deterministic
/// output must write results into per-index slots and reduce afterwards in
/// index order. The first exception thrown by any body is rethrown after
/// all workers stop.
void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t index, int worker)>& body);

}  // namespace modev
