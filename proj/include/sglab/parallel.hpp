#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sglab {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each task owns its
// index, so results written to per-index slots are identical for any worker
// count. The first exception wins and is rethrown on the calling thread.
inline void parallel_for_indexed(long count, int threads, const std::function<void(long)>& fn) {
    if (count <= 0) return;
    const int t = std::max(1, std::min<long>(threads, count));
    if (t == 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lk(err_mu);
                if (!failed.exchange(true)) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failed.load() && err) std::rethrow_exception(err);
}

}  // namespace sglab
