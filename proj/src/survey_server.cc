#include "fmt/format.h"
#include "httplib.h"
#include "prefbasis/error.h"
#include "prefbasis/survey.h"

namespace prefbasis {
namespace {

void Reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(ToLine(body), "application/json; charset=utf-8");
}

void ReplyError(httplib::Response& res, int status, const std::string& message) {
  Reply(res, status, {{"error", message}});
}

// Runs a handler body and maps toolkit errors onto HTTP statuses.
template <typename F>
void Guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const AuthorizationError& e) {
    ReplyError(res, 401, e.what());
  } catch (const ConflictError& e) {
    ReplyError(res, 409, e.what());
  } catch (const ValidationError& e) {
    ReplyError(res, 400, e.what());
  } catch (const PreconditionError& e) {
    ReplyError(res, 503, e.what());
  } catch (const Json::exception&) {
    ReplyError(res, 400, "request body must be a JSON object");
  } catch (const std::exception& e) {
    ReplyError(res, 500, "internal error");
    fmt::print(stderr, "server: {}\n", e.what());
  }
}

bool ConstantTimeEquals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  return diff == 0;
}

}  // namespace

struct SurveyServer::Impl {
  SurveyStore& store;
  AnswerKey answer_key;
  ServerOptions options;
  httplib::Server http;
};

SurveyServer::SurveyServer(SurveyStore& store, AnswerKey answer_key, ServerOptions options)
    : impl_(new Impl{store, std::move(answer_key), std::move(options), {}}) {
  if (impl_->options.operator_token.empty()) {
    throw ConfigError("an operator token is required for /api/metrics");
  }
  Impl& s = *impl_;

  s.http.Post("/api/session", [&s](const httplib::Request&, httplib::Response& res) {
    Guarded(res, [&] {
      const Session session = s.store.CreateSession();
      Reply(res, 200, {{"session_id", session.session_id}, {"total", session.assigned.size()}});
    });
  });

  s.http.Get("/api/task", [&s](const httplib::Request& req, httplib::Response& res) {
    Guarded(res, [&] {
      const std::string id = req.get_param_value("session");
      const MmcTask* task = s.store.NextTask(id);
      const auto session = s.store.FindSession(id);
      const size_t total = session->assigned.size();
      if (task == nullptr) {
        Reply(res, 200, {{"done", true}, {"progress", {{"done", total}, {"total", total}}}});
        return;
      }
      Reply(res, 200, TaskViewToJson(*task, session->completed.size(), total));
    });
  });

  s.http.Post("/api/response", [&s](const httplib::Request& req, httplib::Response& res) {
    Guarded(res, [&] {
      const Json body = Json::parse(req.body);
      if (!body.is_object()) throw ValidationError("request body must be a JSON object");
      const SubmitResult result =
          s.store.Submit(body.at("session").get<std::string>(),
                         body.at("task_id").get<std::string>(),
                         body.at("selected").get<std::vector<int>>());
      Reply(res, 200, {{"ok", true}, {"remaining", result.remaining}});
    });
  });

  s.http.Get("/api/metrics", [&s](const httplib::Request& req, httplib::Response& res) {
    Guarded(res, [&] {
      const std::string header = req.get_header_value("Authorization");
      const std::string prefix = "Bearer ";
      if (header.rfind(prefix, 0) != 0 ||
          !ConstantTimeEquals(header.substr(prefix.size()), s.options.operator_token)) {
        throw AuthorizationError("operator token required");
      }
      const std::vector<MmcResponse> responses = s.store.Responses();
      Json report = MetricsToJson(ComputeMetrics(responses, s.answer_key));
      report["sessions"] = s.store.session_count();
      Reply(res, 200, report);
    });
  });

  if (!s.options.static_dir.empty()) {
    s.http.set_mount_point("/", s.options.static_dir.string());
  }
}

SurveyServer::~SurveyServer() = default;

void SurveyServer::Run(const std::function<void(int)>& on_listening) {
  Impl& s = *impl_;
  int port = s.options.port;
  if (port == 0) {
    port = s.http.bind_to_any_port(s.options.host);
  } else if (!s.http.bind_to_port(s.options.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw IoError(fmt::format("cannot bind {}:{}", s.options.host, s.options.port));
  }
  if (on_listening) on_listening(port);
  s.http.listen_after_bind();
}

void SurveyServer::Stop() { impl_->http.stop(); }

}  // namespace prefbasis
