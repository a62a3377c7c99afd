// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_PARALLEL_HPP
#define BANKREAD_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace bankread {

// Thread count used by parallel_for. 0 means "use hardware_concurrency".
// Results never depend on this value: work is partitioned so that each
// output element is written by exactly one worker in a fixed order, which
// keeps every computation bit-identical to a sequential run.
inline std::atomic<int>& thread_count_setting() {
    static std::atomic<int> n{0};
    return n;
}

inline void set_thread_count(int n) { thread_count_setting().store(n); }

inline int effective_thread_count() {
    int n = thread_count_setting().load();
    if (n <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return n;
}

// Runs fn(i) for i in [begin,end), split into contiguous chunks, one per
// worker. Iterations must write disjoint outputs.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn) {
    const std::size_t total = end > begin ? end - begin : 0;
    const int nthreads = effective_thread_count();
    if (total == 0) return;
    if (nthreads <= 1 || total == 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nthreads), total);
    const std::size_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace bankread

#endif // BANKREAD_PARALLEL_HPP
