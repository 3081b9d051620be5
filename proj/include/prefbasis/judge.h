#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "prefbasis/io.h"
#include "prefbasis/mmc.h"
#include "prefbasis/provider.h"

namespace prefbasis {

enum class ResponseSource { kLlm, kHuman };

std::string_view ResponseSourceName(ResponseSource source);  // "LLM" / "HUMAN"
ResponseSource ResponseSourceFromName(std::string_view name);

struct MmcResponse {
  std::string task_id;
  std::string rater_id;
  std::vector<int> selected;  // 1-based display positions, ascending, no repeats
  ResponseSource source = ResponseSource::kLlm;
  std::string timestamp;

  bool operator==(const MmcResponse&) const = default;
};

Json ResponseToJson(const MmcResponse& response);
MmcResponse ResponseFromJson(const Json& row);
std::vector<MmcResponse> ReadResponses(const std::filesystem::path& path);
void WriteResponses(const std::filesystem::path& path, const std::vector<MmcResponse>& responses);

// Shows the responses in the task's stored order and lists the six choices.
std::string BuildJudgePrompt(const MmcTask& task);

// Accepts only a comma-separated list of positions ("1,4", "2 , 6").
// Throws ParseError (raw text retained) for anything else, including empty
// input, repeats and positions outside 1..choices.
std::vector<int> ParseJudgeResponse(std::string_view text, const MmcTask& task);

struct JudgeSpec {
  std::string name;  // becomes rater_id
  Provider* provider = nullptr;
};

struct JudgeFailure {
  std::string task_id;
  std::string judge;
  std::string reason;
  std::string raw_text;
};

struct JudgeRun {
  std::vector<MmcResponse> responses;  // judge order, then task order
  std::vector<JudgeFailure> failures;
};

struct JudgeOptions {
  // Append-only progress log; completed (task, judge) pairs are not re-asked.
  std::filesystem::path checkpoint;
  // Timestamp source. Defaults to the current UTC time.
  std::function<std::string()> clock;
};

std::string UtcNow();

JudgeRun RunJudges(const std::vector<MmcTask>& tasks, const std::vector<JudgeSpec>& judges,
                   const ProviderConfig& config, const JudgeOptions& options = {});

void WriteJudgeFailures(const std::filesystem::path& path,
                        const std::vector<JudgeFailure>& failures);

struct RatioValue {
  std::string name;
  int numerator_tier = 0;
  int denominator_tier = 0;
  double value = 0.0;
  bool defined = false;
};

struct MetricsReport {
  size_t n_responses = 0;
  std::array<size_t, kTierCount> counts{};  // responses selecting tier i+1
  std::array<double, kTierCount> r{};
  std::vector<RatioValue> ratios;  // fixed order, see RatioDefinitions
};

struct RatioDefinition {
  const char* name;
  int numerator_tier;
  int denominator_tier;
};

// generated_vs_control R1/R5, generated_vs_control_topic R1/R3,
// category_vs_control R4/R5, category_vs_control_topic R2/R3.
const std::array<RatioDefinition, 4>& RatioDefinitions();

// Pooled over all responses. Throws ValidationError for a task_id missing
// from the key or a position outside the task.
MetricsReport ComputeMetrics(const std::vector<MmcResponse>& responses, const AnswerKey& key);

// Same computation per rater and the raw tier counts per task.
std::map<std::string, MetricsReport> MetricsByRater(const std::vector<MmcResponse>& responses,
                                                    const AnswerKey& key);
std::map<std::string, MetricsReport> MetricsByTask(const std::vector<MmcResponse>& responses,
                                                   const AnswerKey& key);

Json MetricsToJson(const MetricsReport& report);

// Writes metrics.json (pooled, per rater, per task) and metrics_table.csv.
void WriteMetricsReports(const std::vector<MmcResponse>& responses, const AnswerKey& key,
                         const std::filesystem::path& dir);

}  // namespace prefbasis
