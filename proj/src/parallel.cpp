#include "loca/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace loca {

int max_threads() {
    if (const char* env = std::getenv("LOCA_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(long begin, long end, const std::function<void(long)>& fn) {
    const long n = end - begin;
    if (n <= 0) return;
    const int workers = static_cast<int>(std::min<long>(max_threads(), n));
    if (workers == 1) {
        for (long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long lo = begin + w * chunk;
        const long hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace loca
