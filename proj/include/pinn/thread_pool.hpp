#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pinn {

/// Minimal persistent pool for parallel_for-style loops. The calling thread
/// participates as worker 0; `n_workers` counts it, so n_workers==1 runs
/// everything inline. Work items are claimed through an atomic counter, but
/// callers are expected to write per-item results and reduce in item order,
/// keeping numerics independent of the worker count.
class ThreadPool {
 public:
  explicit ThreadPool(int n_workers) : n_workers_(n_workers < 1 ? 1 : n_workers) {
    for (int w = 1; w < n_workers_; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return n_workers_; }

  void run(int count, const std::function<void(int item, int worker)>& fn) {
    if (count <= 0) return;
    if (n_workers_ == 1) {
      for (int i = 0; i < count; ++i) fn(i, 0);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      fn_ = &fn;
      count_ = count;
      next_.store(0, std::memory_order_relaxed);
      busy_ = n_workers_ - 1;
      ++generation_;
    }
    cv_.notify_all();
    drain(0);
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return busy_ == 0; });
    fn_ = nullptr;
  }

 private:
  void drain(int worker) {
    const auto& fn = *fn_;
    const int count = count_;
    for (;;) {
      const int i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) break;
      fn(i, worker);
    }
  }

  void worker_loop(int worker) {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this, seen] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
      }
      drain(worker);
      {
        std::lock_guard lock(mutex_);
        if (--busy_ == 0) done_cv_.notify_one();
      }
    }
  }

  int n_workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(int, int)>* fn_ = nullptr;
  int count_ = 0;
  std::atomic<int> next_{0};
  int busy_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace pinn
