#pragma once

// Minimal index-range work sharing for the embarrassingly parallel parts of
// the pipeline. Work is split into contiguous chunks whose boundaries depend
// only on the problem size, never on the thread count, so callers that sum
// per-chunk results in chunk order get thread-count-independent floats.

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wanem {

struct IndexChunk {
    size_t begin = 0;
    size_t end = 0;
};

// At most max_chunks contiguous, near-even chunks covering [0, count).
std::vector<IndexChunk> make_chunks(size_t count, size_t max_chunks);

// Runs fn(chunk_index, chunk) for every chunk, on up to `threads` workers.
// The first exception thrown by any worker is rethrown after all join.
void run_chunks(const std::vector<IndexChunk>& chunks, int threads,
                const std::function<void(size_t, const IndexChunk&)>& fn);

// Convenience: parallel loop over [0, count) with per-index work.
void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn);

} // namespace wanem
