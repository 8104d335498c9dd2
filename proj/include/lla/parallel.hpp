#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lla {

// Fixed-size worker pool for data-parallel loops over index ranges.
// Work is split into static contiguous chunks; each index writes only its
// own output slot, so results do not depend on the number of workers.
class ThreadPool {
  public:
    explicit ThreadPool(unsigned n_threads = 0);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

    // Runs fn(begin, end) over [0, n) split across workers; blocks until done.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

  private:
    struct Task {
        const std::function<void(std::size_t, std::size_t)>* fn = nullptr;
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    void worker_loop(unsigned id);

    std::vector<std::thread> workers_;
    std::vector<Task> tasks_;
    std::mutex mtx_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    std::uint64_t generation_ = 0;
    unsigned pending_ = 0;
    bool stop_ = false;
};

}  // namespace lla
