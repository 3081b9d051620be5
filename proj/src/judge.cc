#include "prefbasis/judge.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <memory>
#include <optional>
#include <set>

#include "fmt/format.h"
#include "prefbasis/batch.h"
#include "prefbasis/error.h"

namespace prefbasis {
namespace {

constexpr char kJudgeTemplate[] =
    R"(Two assistants answered the question below. A separate group of people compared the answers and chose one of them.
Your job is to work out why the chosen answer was preferred.

### Question
{prompt}

### Response 1
{first}

### Response 2
{second}

The people chose Response {chosen_position}.

### Possible reasons
{choices}
Several reasons may apply. Select every reason that explains why Response {chosen_position} was preferred.
Answer with the numbers of the selected reasons only, separated by commas (for example: 1,4). Do not write anything else.)";

const std::array<RatioDefinition, 4> kRatios = {{
    {"generated_vs_control", 1, 5},
    {"generated_vs_control_topic", 1, 3},
    {"category_vs_control", 4, 5},
    {"category_vs_control_topic", 2, 3},
}};

void Finalize(MetricsReport& report) {
  for (int i = 0; i < kTierCount; ++i) {
    report.r[i] = report.n_responses == 0
                      ? 0.0
                      : static_cast<double>(report.counts[i]) /
                            static_cast<double>(report.n_responses);
  }
  report.ratios.clear();
  for (const RatioDefinition& def : kRatios) {
    RatioValue v{def.name, def.numerator_tier, def.denominator_tier, 0.0, false};
    const size_t num = report.counts[def.numerator_tier - 1];
    const size_t den = report.counts[def.denominator_tier - 1];
    if (den != 0) {
      v.value = static_cast<double>(num) / static_cast<double>(den);
      v.defined = true;
    }
    report.ratios.push_back(std::move(v));
  }
}

void Accumulate(MetricsReport& report, const MmcResponse& response, const AnswerKey& key) {
  auto it = key.find(response.task_id);
  if (it == key.end()) {
    throw ValidationError(fmt::format("response for unknown task {}", response.task_id));
  }
  const std::vector<int>& tiers = it->second;
  std::set<int> hit;
  for (int position : response.selected) {
    if (position < 1 || static_cast<size_t>(position) > tiers.size()) {
      throw ValidationError(
          fmt::format("task {}: position {} out of range", response.task_id, position));
    }
    hit.insert(tiers[static_cast<size_t>(position - 1)]);
  }
  ++report.n_responses;
  for (int tier : hit) ++report.counts[static_cast<size_t>(tier - 1)];
}

std::string PairKey(const std::string& task_id, const std::string& judge) {
  return task_id + '\x1f' + judge;
}

}  // namespace

std::string_view ResponseSourceName(ResponseSource source) {
  return source == ResponseSource::kLlm ? "LLM" : "HUMAN";
}

ResponseSource ResponseSourceFromName(std::string_view name) {
  if (name == "LLM") return ResponseSource::kLlm;
  if (name == "HUMAN") return ResponseSource::kHuman;
  throw ValidationError(fmt::format("unknown response source '{}'", name));
}

Json ResponseToJson(const MmcResponse& response) {
  return {{"task_id", response.task_id},
          {"rater_id", response.rater_id},
          {"selected", response.selected},
          {"source", ResponseSourceName(response.source)},
          {"timestamp", response.timestamp}};
}

MmcResponse ResponseFromJson(const Json& row) {
  try {
    MmcResponse r;
    r.task_id = row.at("task_id").get<std::string>();
    r.rater_id = row.at("rater_id").get<std::string>();
    r.selected = row.at("selected").get<std::vector<int>>();
    r.source = ResponseSourceFromName(row.at("source").get<std::string>());
    r.timestamp = row.value("timestamp", "");
    if (r.selected.empty()) throw ValidationError("empty selection");
    return r;
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("malformed response: {}", e.what()));
  }
}

std::vector<MmcResponse> ReadResponses(const std::filesystem::path& path) {
  std::vector<MmcResponse> out;
  size_t line_number = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      out.push_back(ResponseFromJson(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), line_number, e.what()));
    }
  }
  return out;
}

void WriteResponses(const std::filesystem::path& path, const std::vector<MmcResponse>& responses) {
  std::vector<Json> rows;
  rows.reserve(responses.size());
  for (const MmcResponse& r : responses) rows.push_back(ResponseToJson(r));
  WriteJsonLines(path, rows);
}

std::string BuildJudgePrompt(const MmcTask& task) {
  const bool b_first = task.response_order == "BA";
  std::string choices;
  for (size_t i = 0; i < task.choices.size(); ++i) {
    choices += fmt::format("{}. {}\n", i + 1, task.choices[i].text);
  }
  const bool chose_first = (task.chosen == "A") != b_first;
  return fmt::format(kJudgeTemplate, fmt::arg("prompt", task.prompt),
                     fmt::arg("first", b_first ? task.response_b : task.response_a),
                     fmt::arg("second", b_first ? task.response_a : task.response_b),
                     fmt::arg("chosen_position", chose_first ? 1 : 2),
                     fmt::arg("choices", choices));
}

std::vector<int> ParseJudgeResponse(std::string_view text, const MmcTask& task) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError(fmt::format("judge answer for {}: {}", task.task_id, why),
                      std::string(text));
  };
  std::vector<int> out;
  size_t i = 0;
  auto skip_space = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' ||
                               text[i] == '\r')) {
      ++i;
    }
  };
  skip_space();
  if (i == text.size()) throw fail("empty answer");
  while (true) {
    skip_space();
    const size_t start = i;
    long value = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9' && i - start < 4) {
      value = value * 10 + (text[i] - '0');
      ++i;
    }
    if (i == start) throw fail("expected a position number");
    if (value < 1 || static_cast<size_t>(value) > task.choices.size()) {
      throw fail(fmt::format("position {} out of range", value));
    }
    if (std::find(out.begin(), out.end(), value) != out.end()) {
      throw fail(fmt::format("position {} repeated", value));
    }
    out.push_back(static_cast<int>(value));
    skip_space();
    if (i == text.size()) break;
    if (text[i] != ',') throw fail("unexpected text");
    ++i;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

JudgeRun RunJudges(const std::vector<MmcTask>& tasks, const std::vector<JudgeSpec>& judges,
                   const ProviderConfig& config, const JudgeOptions& options) {
  config.Validate();
  std::set<std::string> judge_names;
  for (const JudgeSpec& j : judges) {
    if (j.provider == nullptr) throw PreconditionError(fmt::format("judge {} has no provider", j.name));
    if (!judge_names.insert(j.name).second) {
      throw PreconditionError(fmt::format("judge name {} used twice", j.name));
    }
  }
  std::set<std::string> task_ids;
  for (const MmcTask& t : tasks) {
    if (t.choices.size() != static_cast<size_t>(kTierCount)) {
      throw PreconditionError(fmt::format("task {} does not have six choices", t.task_id));
    }
    if (!task_ids.insert(t.task_id).second) {
      throw PreconditionError(fmt::format("task id {} repeated", t.task_id));
    }
  }
  const auto clock = options.clock ? options.clock : UtcNow;

  const size_t total = tasks.size() * judges.size();
  std::vector<std::optional<MmcResponse>> done(total);
  std::vector<std::optional<JudgeFailure>> failed(total);
  std::map<std::string, size_t> slot;
  for (size_t j = 0; j < judges.size(); ++j) {
    for (size_t t = 0; t < tasks.size(); ++t) {
      slot[PairKey(tasks[t].task_id, judges[j].name)] = j * tasks.size() + t;
    }
  }

  std::unique_ptr<AppendLog> checkpoint;
  if (!options.checkpoint.empty()) {
    if (std::filesystem::exists(options.checkpoint)) {
      for (const std::string& line : ReadLines(options.checkpoint)) {
        try {
          MmcResponse r = ResponseFromJson(Json::parse(line));
          auto it = slot.find(PairKey(r.task_id, r.rater_id));
          if (it != slot.end() && !done[it->second]) done[it->second] = std::move(r);
        } catch (const std::exception&) {
          // torn tail line; that pair is asked again
        }
      }
    }
    checkpoint = std::make_unique<AppendLog>(options.checkpoint, /*durable=*/false);
  }

  std::vector<size_t> pending;
  for (size_t k = 0; k < total; ++k) {
    if (!done[k]) pending.push_back(k);
  }
  RateLimiter limiter(config.requests_per_second);
  RunBounded(pending.size(), config.max_parallel, [&](size_t p) {
    const size_t k = pending[p];
    const JudgeSpec& judge = judges[k / tasks.size()];
    const MmcTask& task = tasks[k % tasks.size()];
    ProviderRequest request{RequestKind::kJudge, BuildJudgePrompt(task)};
    std::vector<int> selected;
    std::string last_raw;
    try {
      CompleteWithRetry(*judge.provider, request, config, &limiter, [&](const std::string& text) {
        last_raw = text;
        selected = ParseJudgeResponse(text, task);
      });
      MmcResponse r{task.task_id, judge.name, std::move(selected), ResponseSource::kLlm, clock()};
      if (checkpoint) checkpoint->Append(ToLine(ResponseToJson(r)));
      done[k] = std::move(r);
    } catch (const ParseError& e) {
      failed[k] = JudgeFailure{task.task_id, judge.name, e.what(), e.raw_text()};
    } catch (const ProviderError& e) {
      failed[k] = JudgeFailure{task.task_id, judge.name, e.what(), last_raw};
    }
  });

  JudgeRun run;
  for (size_t k = 0; k < total; ++k) {
    if (done[k]) {
      run.responses.push_back(std::move(*done[k]));
    } else if (failed[k]) {
      run.failures.push_back(std::move(*failed[k]));
    }
  }
  return run;
}

void WriteJudgeFailures(const std::filesystem::path& path,
                        const std::vector<JudgeFailure>& failures) {
  std::vector<Json> rows;
  for (const JudgeFailure& f : failures) {
    rows.push_back(
        {{"task_id", f.task_id}, {"judge", f.judge}, {"reason", f.reason}, {"raw", f.raw_text}});
  }
  WriteJsonLines(path, rows);
}

const std::array<RatioDefinition, 4>& RatioDefinitions() { return kRatios; }

MetricsReport ComputeMetrics(const std::vector<MmcResponse>& responses, const AnswerKey& key) {
  MetricsReport report;
  for (const MmcResponse& r : responses) Accumulate(report, r, key);
  Finalize(report);
  return report;
}

std::map<std::string, MetricsReport> MetricsByRater(const std::vector<MmcResponse>& responses,
                                                    const AnswerKey& key) {
  std::map<std::string, MetricsReport> out;
  for (const MmcResponse& r : responses) Accumulate(out[r.rater_id], r, key);
  for (auto& [rater, report] : out) Finalize(report);
  return out;
}

std::map<std::string, MetricsReport> MetricsByTask(const std::vector<MmcResponse>& responses,
                                                   const AnswerKey& key) {
  std::map<std::string, MetricsReport> out;
  for (const MmcResponse& r : responses) Accumulate(out[r.task_id], r, key);
  for (auto& [task, report] : out) Finalize(report);
  return out;
}

Json MetricsToJson(const MetricsReport& report) {
  Json ratios = Json::object();
  for (const RatioValue& v : report.ratios) {
    ratios[v.name] = {{"value", v.defined ? Json(v.value) : Json(nullptr)},
                      {"defined", v.defined},
                      {"numerator", fmt::format("R{}", v.numerator_tier)},
                      {"denominator", fmt::format("R{}", v.denominator_tier)}};
  }
  return {{"n_responses", report.n_responses},
          {"counts", report.counts},
          {"r", report.r},
          {"ratios", std::move(ratios)}};
}

void WriteMetricsReports(const std::vector<MmcResponse>& responses, const AnswerKey& key,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const MetricsReport pooled = ComputeMetrics(responses, key);
  const auto by_rater = MetricsByRater(responses, key);
  const auto by_task = MetricsByTask(responses, key);

  Json raters = Json::object();
  for (const auto& [rater, report] : by_rater) raters[rater] = MetricsToJson(report);
  Json tasks = Json::object();
  for (const auto& [task, report] : by_task) {
    tasks[task] = {{"n_responses", report.n_responses}, {"counts", report.counts}};
  }
  WriteJsonFile(dir / "metrics.json", {{"pooled", MetricsToJson(pooled)},
                                       {"by_rater", std::move(raters)},
                                       {"by_task", std::move(tasks)}});

  // Long format: one row per (rater, view, metric); "all" is the pooled set.
  std::string table = "rater,view,metric,value\n";
  auto rows = [&table](const std::string& rater, const MetricsReport& report) {
    for (const RatioValue& v : report.ratios) {
      table += fmt::format("{},ratio,{},{}\n", rater, v.name,
                           v.defined ? fmt::format("{:.6f}", v.value) : "undefined");
    }
    for (int i = 0; i < kTierCount; ++i) {
      table += fmt::format("{},probability,R{},{:.6f}\n", rater, i + 1, report.r[i]);
    }
    table += fmt::format("{},count,n_responses,{}\n", rater, report.n_responses);
  };
  rows("all", pooled);
  for (const auto& [rater, report] : by_rater) rows(rater, report);
  WriteFileAtomic(dir / "metrics_table.csv", table);
}

}  // namespace prefbasis
