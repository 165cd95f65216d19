#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hplb {

// Small persistent worker pool for data-parallel loops. Work items are
// indexed, and callers write results into per-index buffers and reduce them
// in index order afterwards, so results never depend on the worker count.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads) {
        std::size_t n = threads > 0 ? threads - 1 : 0;  // caller thread works too
        for (std::size_t i = 0; i < n; ++i) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const { return workers_.size() + 1; }

    // Runs fn(i) for i in [0, count). Blocks until all items are done.
    // Not reentrant.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
        if (count == 0) return;
        if (workers_.empty()) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mutex_);
            task_ = &fn;
            count_ = count;
            next_.store(0);
            pending_.store(count);
            ++generation_;
        }
        cv_.notify_all();
        run_items();
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [this] { return pending_.load() == 0 && active_ == 0; });
        task_ = nullptr;
    }

private:
    void run_items() {
        for (;;) {
            std::size_t i = next_.fetch_add(1);
            if (i >= count_) break;
            (*task_)(i);
            pending_.fetch_sub(1);
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                ++active_;
            }
            run_items();
            {
                std::lock_guard<std::mutex> lock(mutex_);
                --active_;
                if (pending_.load() == 0 && active_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t count_ = 0;
    std::atomic<std::size_t> next_{0};
    std::atomic<std::size_t> pending_{0};
    std::size_t active_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace hplb
