#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace newtonlab {

/// Worker count: hardware concurrency capped by NEWTONLAB_THREADS.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("NEWTONLAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

/// Row-striped parallel loop; each row is processed exactly once, results go
/// to disjoint buffers, so the output is independent of the worker count.
inline void parallel_rows(int rows, const std::function<void(int)>& body,
                          int workers = 0) {
    int n = workers > 0 ? workers : worker_count();
    if (n <= 1 || rows <= 1) {
        for (int y = 0; y < rows; ++y) body(y);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&, t]() {
            for (int y = t; y < rows; y += n) body(y);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace newtonlab
