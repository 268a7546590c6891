#include "nodalforge/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nodalforge {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads = std::max(0, n); }

int thread_count()
{
    int n = g_threads;
    if (n > 0) return n;
    if (const char* env = std::getenv("NODALFORGE_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

void parallel_for(int n, const std::function<void(int)>& body)
{
    int T = std::min(thread_count(), n);
    if (T <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int k = 0; k < T; ++k)
        pool.emplace_back([&, k] {
            int lo = static_cast<int>(static_cast<long long>(n) * k / T);
            int hi = static_cast<int>(static_cast<long long>(n) * (k + 1) / T);
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace nodalforge
