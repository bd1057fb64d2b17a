#pragma once

// Deterministic fan-out helper: tasks write results by index, so the output
// is identical for any worker count. Not installed.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace dualprobe::detail {

template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    auto loop = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    };
    for (unsigned t = 0; t + 1 < workers; ++t) threads.emplace_back(loop);
    loop();
    for (auto& th : threads) th.join();
}

}  // namespace dualprobe::detail
