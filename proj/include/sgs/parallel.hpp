#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sgs {

// Global worker cap. 0 = hardware concurrency. Results must not depend on
// this value; work is split into index ranges and any cross-range reduction
// is merged in range order by the caller.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks and runs fn(chunk_index, begin, end)
// on worker threads. Chunk boundaries depend only on n, never on the number
// of workers, so chunk-indexed buffers merged in chunk order are
// deterministic.
void parallel_chunks(size_t n, const std::function<void(size_t, size_t, size_t)>& fn);

// Convenience: disjoint-write loop over [0, n).
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

// Number of chunks parallel_chunks will use for n items (for sizing
// chunk-indexed reduction buffers).
size_t parallel_chunk_count(size_t n);

}  // namespace sgs
