#include "prefbasis/survey.h"

#include <algorithm>
#include <random>

#include "fmt/format.h"
#include "prefbasis/error.h"
#include "prefbasis/rng.h"

namespace prefbasis {
namespace {

std::string NewToken() {
  std::random_device rd;
  std::string token;
  for (int i = 0; i < 4; ++i) token += fmt::format("{:08x}", rd());
  return token;
}

// Drops a partial final line left by a crash mid-write, so later appends
// start on a fresh line.
void TruncateTornTail(const std::filesystem::path& path) {
  const std::string content = ReadFile(path);
  if (content.empty() || content.back() == '\n') return;
  const size_t keep = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
  std::filesystem::resize_file(path, keep);
}

}  // namespace

SurveyStore::SurveyStore(std::vector<MmcTask> pool, const std::filesystem::path& log_path,
                         SurveyConfig config)
    : pool_(std::move(pool)), config_(config) {
  if (config_.tasks_per_rater == 0) throw ConfigError("tasks_per_rater must be >= 1");
  for (size_t i = 0; i < pool_.size(); ++i) {
    if (!pool_index_.emplace(pool_[i].task_id, i).second) {
      throw ValidationError(fmt::format("task id {} repeated in the pool", pool_[i].task_id));
    }
  }
  if (std::filesystem::exists(log_path)) {
    TruncateTornTail(log_path);
    Replay(log_path);
  }
  log_ = std::make_unique<AppendLog>(log_path, /*durable=*/true);
}

void SurveyStore::Replay(const std::filesystem::path& log_path) {
  size_t line_number = 0;
  for (const std::string& line : ReadLines(log_path)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const Json row = Json::parse(line);
      const std::string type = row.at("type").get<std::string>();
      if (type == "session") {
        Session s;
        s.session_id = row.at("session_id").get<std::string>();
        s.assigned = row.at("assigned").get<std::vector<std::string>>();
        s.created_at = row.value("created_at", "");
        for (const std::string& id : s.assigned) {
          if (pool_index_.count(id) == 0) {
            throw ValidationError(fmt::format("session {} references unknown task {}",
                                              s.session_id, id));
          }
        }
        sessions_[s.session_id] = std::move(s);
      } else if (type == "response") {
        MmcResponse r = ResponseFromJson(row.at("response"));
        auto it = sessions_.find(r.rater_id);
        if (it == sessions_.end() ||
            std::find(it->second.assigned.begin(), it->second.assigned.end(), r.task_id) ==
                it->second.assigned.end()) {
          throw ValidationError(fmt::format("response to {} outside its session", r.task_id));
        }
        ApplyResponse(r);
      } else {
        throw ValidationError(fmt::format("unknown record type '{}'", type));
      }
    } catch (const Json::exception& e) {
      throw ValidationError(
          fmt::format("{}:{}: {}", log_path.string(), line_number, e.what()));
    }
  }
}

void SurveyStore::ApplyResponse(const MmcResponse& response) {
  sessions_[response.rater_id].completed.insert(response.task_id);
  answers_[{response.rater_id, response.task_id}] = response.selected;
  responses_.push_back(response);
}

Session SurveyStore::CreateSession(std::optional<uint64_t> seed) {
  if (pool_.size() < config_.tasks_per_rater) {
    throw PreconditionError(fmt::format("pool has {} tasks, {} needed per rater", pool_.size(),
                                        config_.tasks_per_rater));
  }
  if (!seed) {
    std::random_device rd;
    seed = (static_cast<uint64_t>(rd()) << 32) | rd();
  }
  std::vector<size_t> order(pool_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(*seed);
  // Partial Fisher-Yates: the first k slots are a uniform ordered sample.
  for (size_t i = 0; i < config_.tasks_per_rater; ++i) {
    std::swap(order[i], order[i + rng.UniformIndex(order.size() - i)]);
  }
  Session s;
  s.created_at = UtcNow();
  for (size_t i = 0; i < config_.tasks_per_rater; ++i) s.assigned.push_back(pool_[order[i]].task_id);

  std::lock_guard<std::mutex> lock(mu_);
  do {
    s.session_id = NewToken();
  } while (sessions_.count(s.session_id) != 0);
  log_->Append(ToLine({{"type", "session"},
                       {"session_id", s.session_id},
                       {"assigned", s.assigned},
                       {"created_at", s.created_at}}));
  sessions_[s.session_id] = s;
  return s;
}

const MmcTask* SurveyStore::NextTask(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw AuthorizationError("unknown session");
  for (const std::string& id : it->second.assigned) {
    if (it->second.completed.count(id) == 0) return &pool_[pool_index_.at(id)];
  }
  return nullptr;
}

SubmitResult SurveyStore::Submit(const std::string& session_id, const std::string& task_id,
                                 std::vector<int> selected) {
  std::sort(selected.begin(), selected.end());
  if (selected.empty()) throw ValidationError("select at least one choice");
  if (std::adjacent_find(selected.begin(), selected.end()) != selected.end()) {
    throw ValidationError("a choice was selected twice");
  }
  if (selected.front() < 1 || selected.back() > kTierCount) {
    throw ValidationError(fmt::format("choices are numbered 1 to {}", kTierCount));
  }

  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw AuthorizationError("unknown session");
  Session& s = it->second;
  auto remaining = [&s] { return s.assigned.size() - s.completed.size(); };

  if (s.completed.count(task_id) != 0) {
    if (answers_.at({session_id, task_id}) == selected) return {remaining(), true};
    throw ConflictError(fmt::format("task {} was already answered", task_id));
  }
  auto current = std::find_if(s.assigned.begin(), s.assigned.end(),
                              [&s](const std::string& id) { return s.completed.count(id) == 0; });
  if (current == s.assigned.end()) throw ConflictError("session is already complete");
  if (*current != task_id) {
    throw ConflictError(fmt::format("expected an answer for task {}", *current));
  }

  MmcResponse r{task_id, session_id, std::move(selected), ResponseSource::kHuman, UtcNow()};
  log_->Append(ToLine({{"type", "response"}, {"response", ResponseToJson(r)}}));
  ApplyResponse(r);
  return {remaining(), false};
}

std::optional<Session> SurveyStore::FindSession(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<MmcResponse> SurveyStore::Responses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return responses_;
}

size_t SurveyStore::session_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return sessions_.size();
}

Json TaskViewToJson(const MmcTask& task, size_t done, size_t total) {
  const bool b_first = task.response_order == "BA";
  Json choices = Json::array();
  for (const MmcChoice& c : task.choices) choices.push_back(c.text);
  const bool chose_first = (task.chosen == "A") != b_first;
  return {{"done", false},
          {"task_id", task.task_id},
          {"prompt", task.prompt},
          {"response_a", b_first ? task.response_b : task.response_a},
          {"response_b", b_first ? task.response_a : task.response_b},
          {"chosen", chose_first ? "A" : "B"},
          {"choices", std::move(choices)},
          {"progress", {{"done", done}, {"total", total}}}};
}

}  // namespace prefbasis
