#ifndef MIXLAB_POOL_HPP
#define MIXLAB_POOL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "mixlab/core.hpp"

namespace mixlab {

/** Runs fn(job) for job = 0..n-1 on `workers` threads. Jobs own their state;
    callers collect results by job index, so reductions are deterministic
    regardless of scheduling. The first exception (by job index) is rethrown. */
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    workers = std::max(1, std::min<int>(workers, (int)n));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    size_t first_err_job = n;
    std::exception_ptr first_err;
    auto body = [&]() {
        for (;;) {
            size_t job = next.fetch_add(1);
            if (job >= n) return;
            try {
                fn(job);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (job < first_err_job) {
                    first_err_job = job;
                    first_err = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (first_err) std::rethrow_exception(first_err);
}

} // namespace mixlab

#endif
