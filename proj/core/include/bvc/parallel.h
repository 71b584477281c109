#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bvc {

// resolves a thread-count request: explicit value, else BVC_THREADS, else hardware
inline int resolveThreadCount(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BVC_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// static block partition over [0, n); each index writes only its own outputs,
// so results are independent of the worker count and of scheduling order
inline void parallelFor(size_t n, int nThreads, const std::function<void(size_t)>& body) {
    int workers = std::min<size_t>(resolveThreadCount(nThreads), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; i++) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    size_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; w++) {
        size_t begin = w * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &body, &errors, w]() {
            try {
                for (size_t i = begin; i < end; i++) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

} // namespace bvc
