#include "prefbasis/mmc.h"

#include <algorithm>
#include <unordered_map>

#include "fmt/format.h"
#include "prefbasis/annotate.h"
#include "prefbasis/error.h"
#include "prefbasis/rng.h"

namespace prefbasis {

GranularSets::GranularSets(const LabeledIndex& index) : index_(index) {
  for (const LabeledRecord& r : index.records()) {
    for (const auto& [preference, granular] : r.granular_by_preference) {
      for (const std::string& g : granular) {
        by_pair_[{preference, r.topic}].insert(g);
        by_topic_[r.topic].insert(g);
        by_preference_[preference].insert(g);
        all_.insert(g);
      }
    }
  }
}

GranularSetBundle GranularSets::Build(const std::string& record_id,
                                      const std::string& preference) const {
  const LabeledRecord* record = index_.Find(record_id);
  if (record == nullptr) throw ValidationError(fmt::format("record {} is not annotated", record_id));
  if (!record->topic_kept) {
    throw ValidationError(fmt::format("record {} has no kept topic", record_id));
  }
  if (record->kept_preferences.count(preference) == 0) {
    throw ValidationError(
        fmt::format("record {} does not carry kept preference '{}'", record_id, preference));
  }
  auto get = [](const auto& m, const auto& key) {
    auto it = m.find(key);
    return it == m.end() ? std::set<std::string>{} : it->second;
  };
  GranularSetBundle bundle;
  bundle.record_id = record_id;
  bundle.preference = preference;
  bundle.topic = record->topic;
  const auto& own = record->granular_by_preference.at(preference);
  bundle.g[0] = std::set<std::string>(own.begin(), own.end());
  bundle.g[1] = get(by_pair_, std::make_pair(preference, record->topic));
  bundle.g[2] = get(by_topic_, record->topic);
  bundle.g[3] = get(by_preference_, preference);
  bundle.g[4] = all_;
  return bundle;
}

GranularSetBundle BuildGranularSets(const LabeledIndex& index, const std::string& record_id,
                                    const std::string& preference) {
  return GranularSets(index).Build(record_id, preference);
}

MmcTask SampleChoices(const GranularSetBundle& bundle, uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> excluded = {NormalizeLabel(kOtherReasons)};
  MmcTask task;
  task.seed = seed;
  for (int tier = 1; tier <= 5; ++tier) {
    const auto& g = bundle.g[static_cast<size_t>(tier - 1)];
    std::vector<std::string> pool;
    std::set<std::string> pool_keys;
    for (const std::string& label : g) {
      const std::string key = NormalizeLabel(label);
      // One representative per normalized key, so two spellings of one
      // phrase do not double its odds.
      if (excluded.count(key) == 0 && pool_keys.insert(key).second) pool.push_back(label);
    }
    if (pool.empty()) {
      throw TaskUnbuildable(
          fmt::format("record {} / '{}': empty pool at tier {}", bundle.record_id,
                      bundle.preference, tier),
          tier);
    }
    task.choices.push_back({pool[rng.UniformIndex(pool.size())], tier});
    for (const std::string& label : g) excluded.insert(NormalizeLabel(label));
  }
  task.choices.push_back({kOtherReasons, 6});
  rng.Shuffle(task.choices);
  return task;
}

BenchmarkResult BuildBenchmark(const LabeledIndex& index, const Corpus& corpus, size_t n_tasks,
                               uint64_t seed) {
  if (n_tasks == 0) throw PreconditionError("n_tasks must be >= 1");
  std::unordered_map<std::string, const ComparisonRecord*> by_id;
  for (const ComparisonRecord& r : corpus) by_id.emplace(r.record_id, &r);

  std::vector<const LabeledRecord*> eligible;
  for (const LabeledRecord& r : index.records()) {
    if (r.topic_kept && !r.kept_preferences.empty()) eligible.push_back(&r);
  }
  Rng order_rng(DeriveSeed(seed, "benchmark-order"));
  order_rng.Shuffle(eligible);

  const GranularSets sets(index);
  BenchmarkResult result;
  result.eligible_records = eligible.size();
  for (const LabeledRecord* record : eligible) {
    if (result.tasks.size() == n_tasks) break;
    auto source = by_id.find(record->record_id);
    if (source == by_id.end()) {
      throw ValidationError(fmt::format("record {} is annotated but not in the corpus",
                                        record->record_id));
    }
    const ComparisonRecord& cr = *source->second;
    if (IsTie(cr.winner)) {
      throw ValidationError(fmt::format("record {} is a tie", cr.record_id));
    }

    Rng rng(DeriveSeed(seed, record->record_id));
    std::vector<std::string> kept(record->kept_preferences.begin(),
                                  record->kept_preferences.end());
    const std::string& preference = kept[rng.UniformIndex(kept.size())];
    const uint64_t task_seed = rng.Next();
    const bool swap = rng.Bernoulli(0.5);
    MmcTask task;
    try {
      task = SampleChoices(sets.Build(record->record_id, preference), task_seed);
    } catch (const TaskUnbuildable& e) {
      result.skipped.push_back({record->record_id, preference, e.tier()});
      continue;
    }
    task.task_id = fmt::format("mmc-{:05d}", result.tasks.size() + 1);
    task.record_id = cr.record_id;
    task.prompt = cr.prompt;
    task.response_a = cr.response_a;
    task.response_b = cr.response_b;
    task.chosen = cr.winner == Winner::kA ? "A" : "B";
    task.response_order = swap ? "BA" : "AB";
    result.tasks.push_back(std::move(task));
  }
  result.shortfall = result.tasks.size() < n_tasks;
  return result;
}

Json TaskToJson(const MmcTask& task) {
  Json choices = Json::array();
  for (const MmcChoice& c : task.choices) choices.push_back({{"text", c.text}});
  return {{"task_id", task.task_id},
          {"record_id", task.record_id},
          {"prompt", task.prompt},
          {"response_a", task.response_a},
          {"response_b", task.response_b},
          {"chosen", task.chosen},
          {"response_order", task.response_order},
          {"choices", std::move(choices)},
          {"seed", task.seed}};
}

Json AnswerKeyToJson(const MmcTask& task) {
  Json tiers = Json::array();
  for (const MmcChoice& c : task.choices) tiers.push_back(c.tier);
  return {{"task_id", task.task_id}, {"tier_key", std::move(tiers)}};
}

void WriteBenchmark(const std::filesystem::path& tasks_path,
                    const std::filesystem::path& answer_key_path,
                    const std::vector<MmcTask>& tasks) {
  std::vector<Json> rows;
  std::vector<Json> keys;
  for (const MmcTask& t : tasks) {
    rows.push_back(TaskToJson(t));
    keys.push_back(AnswerKeyToJson(t));
  }
  WriteJsonLines(tasks_path, rows);
  WriteJsonLines(answer_key_path, keys);
}

AnswerKey ReadAnswerKey(const std::filesystem::path& path) {
  AnswerKey key;
  size_t line_number = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const Json row = Json::parse(line);
      std::vector<int> tiers = row.at("tier_key").get<std::vector<int>>();
      std::vector<int> sorted = tiers;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != std::vector<int>{1, 2, 3, 4, 5, 6}) {
        throw ValidationError("tier_key is not a permutation of 1..6");
      }
      key[row.at("task_id").get<std::string>()] = std::move(tiers);
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), line_number, e.what()));
    }
  }
  return key;
}

AnswerKey MakeAnswerKey(const std::vector<MmcTask>& tasks) {
  AnswerKey key;
  for (const MmcTask& t : tasks) {
    std::vector<int> tiers;
    for (const MmcChoice& c : t.choices) tiers.push_back(c.tier);
    key[t.task_id] = std::move(tiers);
  }
  return key;
}

std::vector<MmcTask> ReadBenchmark(const std::filesystem::path& tasks_path,
                                   const std::filesystem::path& answer_key_path) {
  const AnswerKey key = ReadAnswerKey(answer_key_path);
  std::vector<MmcTask> tasks;
  size_t line_number = 0;
  for (const std::string& line : ReadLines(tasks_path)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const Json row = Json::parse(line);
      MmcTask t;
      t.task_id = row.at("task_id").get<std::string>();
      t.record_id = row.at("record_id").get<std::string>();
      t.prompt = row.at("prompt").get<std::string>();
      t.response_a = row.at("response_a").get<std::string>();
      t.response_b = row.at("response_b").get<std::string>();
      t.chosen = row.at("chosen").get<std::string>();
      t.response_order = row.value("response_order", "AB");
      t.seed = row.value("seed", uint64_t{0});
      auto tiers = key.find(t.task_id);
      if (tiers == key.end()) {
        throw ValidationError(fmt::format("task {} missing from answer key", t.task_id));
      }
      const Json& choices = row.at("choices");
      if (choices.size() != tiers->second.size()) {
        throw ValidationError(fmt::format("task {} has {} choices", t.task_id, choices.size()));
      }
      for (size_t i = 0; i < choices.size(); ++i) {
        t.choices.push_back({choices[i].at("text").get<std::string>(), tiers->second[i]});
      }
      tasks.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: {}", tasks_path.string(), line_number, e.what()));
    }
  }
  return tasks;
}

}  // namespace prefbasis
