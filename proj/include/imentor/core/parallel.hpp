#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace imentor {

/// Number of workers to use when the caller asked for `requested` (0 = auto).
inline std::size_t worker_count(std::size_t requested, std::size_t items) {
  std::size_t n = requested != 0 ? requested : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, items));
}

/// Applies `fn(i)` for i in [0, count) on up to `workers` threads and stores
/// results by index, so the output never depends on scheduling. The first
/// exception thrown by any task is rethrown after all workers stop.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t count, std::size_t workers, Fn&& fn) {
  std::vector<Result> out(count);
  if (count == 0) return out;
  workers = worker_count(workers, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

using Clock = std::chrono::steady_clock;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

/// Token bucket shared by concurrent callers. Clock and sleep are injectable
/// so tests can run it on virtual time.
class RateLimiter {
 public:
  using NowFn = std::function<Clock::time_point()>;

  RateLimiter(double per_second, double burst, Sleeper sleeper = real_sleeper(),
              NowFn now = [] { return Clock::now(); })
      : rate_(per_second), burst_(burst), tokens_(burst), sleeper_(std::move(sleeper)), now_(std::move(now)) {
    last_ = now_();
  }

  /// Blocks until one request may be issued. A non-positive rate disables limiting.
  void acquire() {
    if (rate_ <= 0) return;
    for (;;) {
      std::chrono::milliseconds wait{0};
      {
        std::lock_guard lock(mutex_);
        refill();
        if (tokens_ >= 1.0) {
          tokens_ -= 1.0;
          ++granted_;
          return;
        }
        wait = std::chrono::milliseconds(static_cast<long long>(std::ceil((1.0 - tokens_) / rate_ * 1000.0)));
      }
      sleeper_(std::max(wait, std::chrono::milliseconds{1}));
    }
  }

  /// Empties the bucket until `until`, e.g. after the server reports an
  /// exhausted quota.
  void block_until(Clock::time_point until) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(mutex_);
      tokens_ = 0;
      const auto now = now_();
      if (until > now) wait = std::chrono::ceil<std::chrono::milliseconds>(until - now);
    }
    if (wait.count() > 0) sleeper_(wait);
  }

  std::size_t granted() const {
    std::lock_guard lock(mutex_);
    return granted_;
  }

 private:
  void refill() {
    const auto now = now_();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  }

  double rate_;
  double burst_;
  double tokens_;
  Sleeper sleeper_;
  NowFn now_;
  Clock::time_point last_;
  std::size_t granted_ = 0;
  mutable std::mutex mutex_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
};

/// Calls `fn` until it returns without throwing a retryable exception type
/// `E`, sleeping with exponential backoff in between. The last failure is
/// rethrown.
template <typename E, typename Fn>
auto with_retries(const RetryPolicy& policy, const Sleeper& sleep, Fn&& fn) -> decltype(fn()) {
  auto delay = policy.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const E&) {
      if (attempt >= policy.max_attempts) throw;
    }
    sleep(delay);
    delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * policy.multiplier));
  }
}

}  // namespace imentor
