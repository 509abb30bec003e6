#include "subsense/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace subsense {

namespace {
std::atomic<unsigned> g_limit{0};
thread_local bool t_inside = false;  // nested loops run serially on the calling worker
}

void set_thread_limit(unsigned threads) { g_limit.store(threads); }

unsigned thread_limit() {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned cap = g_limit.load();
    return cap == 0 ? hw : std::min(cap, hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(thread_limit(), n);
    if (workers <= 1 || t_inside) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            t_inside = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace subsense
