#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fracflow {

/// Runs f(task) for task in [0, tasks) on up to `threads` workers. The task split is fixed
/// by the caller, so results that are reduced in task order do not depend on `threads`.
template <class F>
void parallel_for(int tasks, int threads, F&& f)
{
    threads = std::clamp(threads, 1, std::max(tasks, 1));
    if (threads == 1) {
        for (int t = 0; t < tasks; ++t) f(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int t = next++; t < tasks; t = next++) {
            try {
                f(t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Half-open range of chunk `k` out of `chunks` over n items.
inline std::pair<int, int> chunk_range(int n, int chunks, int k)
{
    const long long lo = static_cast<long long>(n) * k / chunks;
    const long long hi = static_cast<long long>(n) * (k + 1) / chunks;
    return {static_cast<int>(lo), static_cast<int>(hi)};
}

}  // namespace fracflow
