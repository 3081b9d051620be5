#include <cstdlib>
#include <regex>

#include "fmt/format.h"
#include "httplib.h"
#include "prefbasis/error.h"
#include "prefbasis/provider.h"

namespace prefbasis {
namespace {

std::string ApiKeyFromEnvironment() {
  const char* key = std::getenv("PREFBASIS_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw ConfigError("PREFBASIS_API_KEY is not set; required for the live provider");
  }
  return key;
}

}  // namespace

HttpProvider::HttpProvider(const ProviderConfig& config)
    : HttpProvider(config, ApiKeyFromEnvironment()) {}

HttpProvider::HttpProvider(const ProviderConfig& config, std::string api_key)
    : model_(config.model), api_key_(std::move(api_key)), timeout_(config.timeout) {
  static const std::regex kEndpoint(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(config.endpoint, match, kEndpoint)) {
    throw ConfigError(fmt::format("malformed provider endpoint '{}'", config.endpoint));
  }
  scheme_host_port_ = match[1].str();
  path_prefix_ = match[2].matched ? match[2].str() : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (model_.empty()) throw ConfigError("provider model must be set");
}

std::string HttpProvider::Complete(const ProviderRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  client.set_bearer_token_auth(api_key_);

  const Json body = {
      {"model", model_},
      {"temperature", 0},
      {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})},
  };
  auto result = client.Post(path_prefix_ + "/chat/completions", ToLine(body),
                            "application/json");
  if (!result) {
    throw ProviderError(
        fmt::format("transport failure: {}", httplib::to_string(result.error())));
  }
  if (result->status != 200) {
    throw ProviderError(fmt::format("provider returned HTTP {}", result->status),
                        result->status);
  }
  try {
    Json reply = Json::parse(result->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw ProviderError(fmt::format("unexpected provider payload: {}", e.what()),
                        result->status);
  }
}

}  // namespace prefbasis
