#ifndef UNLEARN_PARALLEL_HPP
#define UNLEARN_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace unlearn {

// Runs fn(i) for i in [0, count) on up to num_threads workers. Work items
// must write into disjoint slots; aggregation stays with the caller so
// results are independent of scheduling order. num_threads <= 1 runs inline.
inline void parallel_for(std::size_t count, int num_threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned workers = num_threads <= 0 ? std::thread::hardware_concurrency()
                                        : static_cast<unsigned>(num_threads);
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace unlearn

#endif // UNLEARN_PARALLEL_HPP
