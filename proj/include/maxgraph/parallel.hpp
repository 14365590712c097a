#pragma once

#include <cstddef>
#include <functional>

namespace maxgraph {

// Worker count: MAXGRAPH_THREADS when set (>= 1), else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, count) across worker_count() threads. Each index
// is visited exactly once; body must only write to index-private storage.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace maxgraph
