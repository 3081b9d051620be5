#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <mutex>
#include <string>

#include "prefbasis/provider.h"

namespace prefbasis {

// Spaces request starts at least 1/rate seconds apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);

  void Acquire();

 private:
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
  std::mutex mu_;
};

// Exponential backoff schedule: initial * 2^attempt, capped.
std::chrono::milliseconds BackoffDelay(const ProviderConfig& config, int attempt);

struct CallOutcome {
  std::string text;
  int attempts = 0;
};

// Calls `provider` up to 1 + retry_budget times. `accept` may throw to reject
// a response (e.g. unparseable output), which also consumes an attempt.
// Rethrows the last error once the budget is exhausted.
CallOutcome CompleteWithRetry(Provider& provider, const ProviderRequest& request,
                              const ProviderConfig& config, RateLimiter* limiter,
                              const std::function<void(const std::string&)>& accept = {});

// Runs body(i) for i in [0, n) on at most `max_parallel` threads.
// Exceptions escaping `body` are rethrown after all workers stop.
void RunBounded(size_t n, int max_parallel, const std::function<void(size_t)>& body);

}  // namespace prefbasis
