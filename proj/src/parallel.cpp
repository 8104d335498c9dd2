#include "lla/parallel.hpp"

#include <algorithm>

namespace lla {

ThreadPool::ThreadPool(unsigned n_threads) {
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    tasks_.resize(n_threads);
    for (unsigned i = 0; i + 1 < n_threads; ++i) {
        workers_.emplace_back([this, i] { worker_loop(i); });
    }
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lk(mtx_);
        stop_ = true;
        ++generation_;
    }
    cv_start_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned n_workers = size();
    if (n_workers == 1 || n == 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + n_workers - 1) / n_workers;
    unsigned used = 0;
    {
        std::lock_guard<std::mutex> lk(mtx_);
        for (unsigned i = 1; i < n_workers; ++i) {
            std::size_t b = static_cast<std::size_t>(i) * chunk;
            std::size_t e = std::min(n, b + chunk);
            if (b >= e) {
                tasks_[i - 1].fn = nullptr;
                continue;
            }
            tasks_[i - 1] = Task{&fn, b, e};
            ++used;
        }
        pending_ = used;
        ++generation_;
    }
    cv_start_.notify_all();

    // Calling thread takes the first chunk.
    fn(0, std::min(n, chunk));

    std::unique_lock<std::mutex> lk(mtx_);
    cv_done_.wait(lk, [this] { return pending_ == 0; });
}

void ThreadPool::worker_loop(unsigned id) {
    std::uint64_t seen = 0;
    for (;;) {
        Task task;
        {
            std::unique_lock<std::mutex> lk(mtx_);
            cv_start_.wait(lk, [&] { return stop_ || generation_ != seen; });
            seen = generation_;
            if (stop_) return;
            task = tasks_[id];
            tasks_[id].fn = nullptr;
        }
        if (task.fn != nullptr) {
            (*task.fn)(task.begin, task.end);
            {
                std::lock_guard<std::mutex> lk(mtx_);
                --pending_;
            }
            cv_done_.notify_one();
        }
    }
}

}  // namespace lla
