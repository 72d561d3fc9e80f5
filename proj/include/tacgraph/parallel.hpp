#pragma once

#include <cstddef>
#include <functional>

namespace tacgraph {

/// Worker cap: TACGRAPH_THREADS if set and positive, else hardware concurrency (>= 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
/// Indices are split into contiguous blocks, so callers that write results by index
/// and reduce in index order get thread-count-independent output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

}  // namespace tacgraph
