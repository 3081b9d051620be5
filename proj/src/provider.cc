#include "prefbasis/provider.h"

#include "fmt/format.h"
#include "prefbasis/error.h"

namespace prefbasis {

std::string_view RequestKindName(RequestKind kind) {
  switch (kind) {
    case RequestKind::kExtract:
      return "extract";
    case RequestKind::kCluster:
      return "cluster";
    case RequestKind::kJudge:
      return "judge";
  }
  return "extract";
}

RequestKind RequestKindFromName(std::string_view name) {
  if (name == "extract") return RequestKind::kExtract;
  if (name == "cluster") return RequestKind::kCluster;
  if (name == "judge") return RequestKind::kJudge;
  throw ValidationError(fmt::format("unknown request kind '{}'", name));
}

void ProviderConfig::Validate() const {
  if (max_parallel < 1) throw ConfigError("max_parallel must be >= 1");
  if (retry_budget < 0) throw ConfigError("retry_budget must be >= 0");
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (requests_per_second < 0) throw ConfigError("requests_per_second must be >= 0");
}

RecordingProvider::RecordingProvider(Provider& inner,
                                     const std::filesystem::path& transcript)
    : inner_(inner), log_(transcript, /*durable=*/false) {}

std::string RecordingProvider::Complete(const ProviderRequest& request) {
  std::string response = inner_.Complete(request);
  log_.Append(ToLine({{"kind", RequestKindName(request.kind)},
                      {"prompt", request.prompt},
                      {"response", response}}));
  return response;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& transcript) {
  const std::vector<std::string> lines = ReadLines(transcript);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      Json row = Json::parse(lines[i]);
      responses_[{RequestKindFromName(row.at("kind").get<std::string>()),
                  row.at("prompt").get<std::string>()}]
          .push_back(row.at("response").get<std::string>());
    } catch (const Json::exception& e) {
      throw ValidationError(
          fmt::format("{}:{}: bad transcript row: {}", transcript.string(), i + 1, e.what()));
    }
  }
}

std::string ReplayProvider::Complete(const ProviderRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = responses_.find({request.kind, request.prompt});
  if (it == responses_.end() || it->second.empty()) {
    throw ProviderError(fmt::format("transcript has no {} response for this prompt",
                                    RequestKindName(request.kind)));
  }
  std::string response = std::move(it->second.front());
  // The last recorded answer keeps serving repeats, e.g. on retries.
  if (it->second.size() > 1) {
    it->second.pop_front();
  } else {
    it->second.front() = response;
  }
  return response;
}

}  // namespace prefbasis
