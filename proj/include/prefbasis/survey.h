#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prefbasis/io.h"
#include "prefbasis/judge.h"
#include "prefbasis/mmc.h"

namespace prefbasis {

struct Session {
  std::string session_id;
  std::vector<std::string> assigned;  // task ids in serving order
  std::set<std::string> completed;
  std::string created_at;
};

struct SurveyConfig {
  size_t tasks_per_rater = 20;
};

struct SubmitResult {
  size_t remaining = 0;
  bool duplicate = false;  // exact resubmission, nothing written
};

// Session bookkeeping over one append-only log. Every acknowledged change is
// fsynced before the call returns; construction replays the log.
class SurveyStore {
 public:
  // Throws ValidationError when the log references tasks outside the pool.
  SurveyStore(std::vector<MmcTask> pool, const std::filesystem::path& log_path,
              SurveyConfig config = {});

  // Throws PreconditionError when the pool is smaller than tasks_per_rater.
  // Without a seed the assignment is drawn from std::random_device.
  Session CreateSession(std::optional<uint64_t> seed = std::nullopt);

  // Current task of the session, or nullptr when every task is done.
  // Throws AuthorizationError for an unknown token.
  const MmcTask* NextTask(const std::string& session_id) const;

  // Throws AuthorizationError, ValidationError (empty, repeated or
  // out-of-range positions) or ConflictError (not the current task, or a
  // different answer for an already completed task).
  SubmitResult Submit(const std::string& session_id, const std::string& task_id,
                      std::vector<int> selected);

  std::optional<Session> FindSession(const std::string& session_id) const;
  std::vector<MmcResponse> Responses() const;
  size_t session_count() const;
  size_t total_per_session() const { return config_.tasks_per_rater; }

 private:
  void Replay(const std::filesystem::path& log_path);
  void ApplyResponse(const MmcResponse& response);

  std::vector<MmcTask> pool_;
  std::map<std::string, size_t> pool_index_;
  SurveyConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::pair<std::string, std::string>, std::vector<int>> answers_;
  std::vector<MmcResponse> responses_;
  std::unique_ptr<AppendLog> log_;
};

// Rater view of a task: responses in stored display order, labels A/B refer
// to display position, no tier data.
Json TaskViewToJson(const MmcTask& task, size_t done, size_t total);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string operator_token;
  std::filesystem::path static_dir;  // optional UI bundle
};

// Blocks serving HTTP until Stop() is called from another thread or a signal
// handler. `on_listening` receives the bound port.
class SurveyServer {
 public:
  SurveyServer(SurveyStore& store, AnswerKey answer_key, ServerOptions options);
  ~SurveyServer();

  void Run(const std::function<void(int)>& on_listening = {});
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prefbasis
