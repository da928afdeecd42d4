#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace paragroup {

// Worker count: min(hardware, PARAGROUP_THREADS). Results never depend on the
// thread count; parallel loops write disjoint slots and reduce serially.
inline int worker_count() {
    static int n = [] {
        int hw = int(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("PARAGROUP_THREADS")) {
            int cap = std::atoi(env);
            if (cap > 0) hw = std::min(hw, cap);
        }
        return hw;
    }();
    return n;
}

namespace detail {
inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

// Nested parallel regions and small loops run serially; only a large
// outermost loop forks (thread-spawn latency dominates below ~100 items).
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int nw = worker_count();
    if (nw <= 1 || n < 96 || detail::in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    nw = int(std::min<std::size_t>(std::size_t(nw), n));
    std::vector<std::thread> pool;
    pool.reserve(nw);
    std::size_t chunk = (n + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
        std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            detail::in_parallel_region() = true;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace paragroup
