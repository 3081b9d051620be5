#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "prefbasis/corpus.h"
#include "prefbasis/io.h"
#include "prefbasis/labeled_index.h"

namespace prefbasis {

inline constexpr char kOtherReasons[] = "other reason(s)";
inline constexpr int kTierCount = 6;

// g[0]..g[4] hold G1..G5 for one (record, preference) pair.
struct GranularSetBundle {
  std::string record_id;
  std::string preference;
  std::string topic;
  std::array<std::set<std::string>, 5> g;
};

struct MmcChoice {
  std::string text;
  int tier = 0;  // 1..6, never serialized into the served task
};

struct MmcTask {
  std::string task_id;
  std::string record_id;
  std::string prompt;
  std::string response_a;
  std::string response_b;
  std::string chosen;          // "A" or "B"
  std::string response_order;  // "AB" or "BA": display order of the two responses
  std::vector<MmcChoice> choices;  // display order
  uint64_t seed = 0;
};

// Precomputed granular pools keyed by category. Read-only after construction.
class GranularSets {
 public:
  explicit GranularSets(const LabeledIndex& index);

  // Throws ValidationError when the record is unknown, its topic is not kept,
  // or `preference` is not one of its kept categories.
  GranularSetBundle Build(const std::string& record_id, const std::string& preference) const;

 private:
  const LabeledIndex& index_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> by_pair_;
  std::map<std::string, std::set<std::string>> by_topic_;
  std::map<std::string, std::set<std::string>> by_preference_;
  std::set<std::string> all_;
};

GranularSetBundle BuildGranularSets(const LabeledIndex& index, const std::string& record_id,
                                    const std::string& preference);

// Draws tiers 1..5 from G_i minus (G_1 u ... u G_{i-1}), compared on
// normalized text, appends the fixed tier-6 choice and shuffles. Fills the
// choices and seed of the returned task; other fields are left empty.
// Throws TaskUnbuildable naming the first tier whose pool is empty.
MmcTask SampleChoices(const GranularSetBundle& bundle, uint64_t seed);

struct BenchmarkSkip {
  std::string record_id;
  std::string preference;
  int tier = 0;
};

struct BenchmarkResult {
  std::vector<MmcTask> tasks;
  std::vector<BenchmarkSkip> skipped;
  size_t eligible_records = 0;
  bool shortfall = false;
};

// Walks eligible records (kept topic, at least one kept preference) in a
// seeded order, one task per record at most. Throws PreconditionError when
// n_tasks is 0 and ValidationError when a record is missing from the corpus.
BenchmarkResult BuildBenchmark(const LabeledIndex& index, const Corpus& corpus, size_t n_tasks,
                               uint64_t seed);

// Rater-facing view: no tier information.
Json TaskToJson(const MmcTask& task);
// Tier of each display position, 1-based positions.
Json AnswerKeyToJson(const MmcTask& task);

// Answer key: task_id -> tier of each display position.
using AnswerKey = std::map<std::string, std::vector<int>>;

void WriteBenchmark(const std::filesystem::path& tasks_path,
                    const std::filesystem::path& answer_key_path,
                    const std::vector<MmcTask>& tasks);
// Reads the served tasks and joins the tiers back in from the answer key.
std::vector<MmcTask> ReadBenchmark(const std::filesystem::path& tasks_path,
                                   const std::filesystem::path& answer_key_path);
AnswerKey ReadAnswerKey(const std::filesystem::path& path);
AnswerKey MakeAnswerKey(const std::vector<MmcTask>& tasks);

}  // namespace prefbasis
