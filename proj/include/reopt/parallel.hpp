#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace reopt {

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 = hardware
/// concurrency). Indices are claimed dynamically, so callers must write
/// results by index to stay independent of scheduling. The first exception
/// thrown by any body is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    auto run = [&] {
        try {
            for (std::size_t i = next++; i < count && !failed; i = next++) body(i);
        } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace reopt
