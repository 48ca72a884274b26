#ifndef SPAM_PARALLEL_HPP
#define SPAM_PARALLEL_HPP

// A small bounded worker pool for embarrassingly parallel index ranges.
//
// Determinism contract: tasks write only to their own output slot (indexed by
// the item number) and any reduction over slots happens afterwards in index
// order on the calling thread, so results are identical for every worker
// count, including zero workers (serial execution).

#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spam {

class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    const int workers = threads > 1 ? threads - 1 : 0;  // caller participates too
    for (int i = 0; i < workers; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  // Runs fn(0), ..., fn(items-1), blocking until all complete.  Exceptions
  // thrown by fn are captured and rethrown (first one wins).
  void run_indexed(long items, const std::function<void(long)>& fn) {
    if (items <= 0) return;
    if (workers_.empty() || items == 1) {
      for (long i = 0; i < items; ++i) fn(i);
      return;
    }
    {
      std::unique_lock<std::mutex> lock(mu_);
      fn_.store(&fn, std::memory_order_relaxed);
      items_.store(items, std::memory_order_relaxed);
      remaining_.store(items, std::memory_order_relaxed);
      // The release store publishes fn_/items_/remaining_ to any worker whose
      // next fetch_add observes the reset counter.
      next_.store(0, std::memory_order_release);
      ++generation_;
    }
    cv_.notify_all();
    drain();  // calling thread helps
    {
      std::unique_lock<std::mutex> lock(mu_);
      done_cv_.wait(lock, [this] { return remaining_.load(std::memory_order_acquire) == 0; });
      fn_.store(nullptr, std::memory_order_relaxed);
    }
    if (error_) {
      std::exception_ptr e = error_;
      error_ = nullptr;
      std::rethrow_exception(e);
    }
  }

 private:
  void drain() {
    for (;;) {
      const long i = next_.fetch_add(1, std::memory_order_acq_rel);
      if (i >= items_.load(std::memory_order_acquire)) break;
      const auto* fn = fn_.load(std::memory_order_acquire);
      try {
        (*fn)(i);
      } catch (...) {
        std::unique_lock<std::mutex> lock(mu_);
        if (!error_) error_ = std::current_exception();
      }
      if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.notify_all();
      }
    }
  }

  void worker_loop() {
    long seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [this, seen] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      drain();
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::atomic<const std::function<void(long)>*> fn_{nullptr};
  std::atomic<long> next_{0};
  std::atomic<long> remaining_{0};
  std::atomic<long> items_{0};
  long generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace spam

#endif  // SPAM_PARALLEL_HPP
