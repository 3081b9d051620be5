#include "prefbasis/batch.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "prefbasis/error.h"

namespace prefbasis {

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / requests_per_second));
  }
}

void RateLimiter::Acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::chrono::milliseconds BackoffDelay(const ProviderConfig& config, int attempt) {
  const auto initial = config.backoff_initial.count();
  if (initial <= 0) return std::chrono::milliseconds(0);
  long long delay = initial;
  for (int i = 0; i < attempt && delay < config.backoff_max.count(); ++i) delay *= 2;
  return std::chrono::milliseconds(std::min<long long>(delay, config.backoff_max.count()));
}

CallOutcome CompleteWithRetry(Provider& provider, const ProviderRequest& request,
                              const ProviderConfig& config, RateLimiter* limiter,
                              const std::function<void(const std::string&)>& accept) {
  const int max_attempts = 1 + std::max(0, config.retry_budget);
  for (int attempt = 0;; ++attempt) {
    try {
      if (limiter != nullptr) limiter->Acquire();
      CallOutcome outcome{provider.Complete(request), attempt + 1};
      if (accept) accept(outcome.text);
      return outcome;
    } catch (const ProviderError&) {
      if (attempt + 1 >= max_attempts) throw;
    } catch (const ParseError&) {
      if (attempt + 1 >= max_attempts) throw;
    } catch (const ValidationError&) {
      if (attempt + 1 >= max_attempts) throw;
    }
    std::this_thread::sleep_for(BackoffDelay(config, attempt));
  }
}

void RunBounded(size_t n, int max_parallel, const std::function<void(size_t)>& body) {
  if (n == 0) return;
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, max_parallel)));
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&] {
    for (size_t i = next++; i < n && !failed; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace prefbasis
