#include "wanem/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace wanem {

std::vector<IndexChunk> make_chunks(size_t count, size_t max_chunks) {
    std::vector<IndexChunk> chunks;
    if (count == 0) return chunks;
    const size_t n = std::min(std::max<size_t>(1, max_chunks), count);
    const size_t base = count / n;
    const size_t extra = count % n;
    size_t begin = 0;
    for (size_t k = 0; k < n; ++k) {
        const size_t len = base + (k < extra ? 1 : 0);
        chunks.push_back(IndexChunk{begin, begin + len});
        begin += len;
    }
    return chunks;
}

void run_chunks(const std::vector<IndexChunk>& chunks, int threads,
                const std::function<void(size_t, const IndexChunk&)>& fn) {
    if (chunks.empty()) return;

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= chunks.size()) return;
            try {
                fn(k, chunks[k]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int workers = std::clamp<int>(threads, 1, static_cast<int>(chunks.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
    const auto chunks = make_chunks(count, std::max(1, threads) * 4);
    run_chunks(chunks, threads, [&fn](size_t, const IndexChunk& chunk) {
        for (size_t k = chunk.begin; k < chunk.end; ++k) fn(k);
    });
}

} // namespace wanem
