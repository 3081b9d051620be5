#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "prefbasis/io.h"

namespace prefbasis {

enum class RequestKind { kExtract, kCluster, kJudge };

std::string_view RequestKindName(RequestKind kind);
RequestKind RequestKindFromName(std::string_view name);

struct ProviderRequest {
  RequestKind kind = RequestKind::kExtract;
  std::string prompt;
};

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  int max_parallel = 4;
  int retry_budget = 3;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{30000};
  // 0 disables rate limiting.
  double requests_per_second = 0.0;
  uint64_t seed = 0;

  // Throws ConfigError when a field is out of range.
  void Validate() const;
};

// A text-completion backend. Implementations must be safe to call from
// several threads at once. Failures surface as ProviderError.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string Complete(const ProviderRequest& request) = 0;
  virtual std::string Name() const = 0;
};

// Deterministic offline stand-in: every answer is a pure function of
// (request kind, prompt, seed).
class MockProvider : public Provider {
 public:
  explicit MockProvider(uint64_t seed) : seed_(seed) {}

  std::string Complete(const ProviderRequest& request) override;
  std::string Name() const override { return "mock"; }

 private:
  std::string Extract(const std::string& prompt) const;
  std::string Cluster(const std::string& prompt) const;
  std::string Judge(const std::string& prompt) const;

  uint64_t seed_;
};

// OpenAI-compatible chat-completions client. The API key comes from
// PREFBASIS_API_KEY.
class HttpProvider : public Provider {
 public:
  // Throws ConfigError when the key is missing or the endpoint is malformed.
  explicit HttpProvider(const ProviderConfig& config);
  HttpProvider(const ProviderConfig& config, std::string api_key);

  std::string Complete(const ProviderRequest& request) override;
  std::string Name() const override { return model_; }

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string model_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

// Forwards to `inner` and appends every exchange to a transcript file.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, const std::filesystem::path& transcript);

  std::string Complete(const ProviderRequest& request) override;
  std::string Name() const override { return inner_.Name(); }

 private:
  Provider& inner_;
  AppendLog log_;
};

// Serves responses from a recorded transcript. Identical requests recorded
// several times are replayed in recording order.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& transcript);

  std::string Complete(const ProviderRequest& request) override;
  std::string Name() const override { return "replay"; }

 private:
  std::mutex mu_;
  std::map<std::pair<RequestKind, std::string>, std::deque<std::string>> responses_;
};

}  // namespace prefbasis
