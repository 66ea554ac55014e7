#include "sgs/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace sgs {

namespace {
std::atomic<int> g_threads{0};

// Fixed chunk layout: 4 chunks per hardware thread, independent of the
// current worker cap, so reductions merged in chunk order are stable.
size_t chunk_count_for(size_t n) {
    const size_t hw = std::max(1u, std::thread::hardware_concurrency());
    return std::min(n, hw * 4);
}
}  // namespace

void set_thread_count(int n) { g_threads.store(n); }

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_chunks(size_t n, const std::function<void(size_t, size_t, size_t)>& fn) {
    if (n == 0) return;
    const size_t chunks = chunk_count_for(n);
    const int workers = std::min<size_t>(thread_count(), chunks);
    if (workers <= 1) {
        for (size_t c = 0; c < chunks; ++c) {
            const size_t b = c * n / chunks, e = (c + 1) * n / chunks;
            if (b < e) fn(c, b, e);
        }
        return;
    }
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (;;) {
            const size_t c = next.fetch_add(1);
            if (c >= chunks) break;
            const size_t b = c * n / chunks, e = (c + 1) * n / chunks;
            if (b < e) fn(c, b, e);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    parallel_chunks(n, [&](size_t, size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) fn(i);
    });
}

size_t parallel_chunk_count(size_t n) { return chunk_count_for(n); }

}  // namespace sgs
