#include "prefbasis/analytics.h"

#include <algorithm>
#include <map>

#include "fmt/format.h"
#include "prefbasis/error.h"

namespace prefbasis {
namespace {

std::map<std::string, size_t> CountPreferences(const LabeledIndex& index,
                                               const std::optional<std::string>& topic,
                                               size_t* scope_records) {
  std::map<std::string, size_t> counts;
  size_t in_scope = 0;
  for (const LabeledRecord& r : index.records()) {
    if (topic && r.topic != *topic) continue;
    ++in_scope;
    for (const std::string& p : r.kept_preferences) ++counts[p];
  }
  if (scope_records != nullptr) *scope_records = in_scope;
  return counts;
}

double Fraction(size_t count, size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

std::string CsvField(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      out += c;
    } else if (c >= 'A' && c <= 'Z') {
      out += static_cast<char>(c - 'A' + 'a');
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void RequireKeptTopic(const LabeledIndex& index, const std::string& topic) {
  if (!index.IsKeptTopic(topic)) {
    throw ValidationError(fmt::format("unknown topic category '{}'", topic));
  }
}

}  // namespace

DistributionTable PreferenceDistribution(const LabeledIndex& index,
                                         const std::optional<std::string>& topic) {
  if (topic) RequireKeptTopic(index, *topic);
  DistributionTable table;
  table.topic = topic;
  size_t overall_n = 0;
  const auto overall = CountPreferences(index, std::nullopt, &overall_n);
  const auto scoped = topic ? CountPreferences(index, topic, &table.scope_records) : overall;
  if (!topic) table.scope_records = overall_n;

  for (const std::string& category : index.kept_preferences()) {
    auto count = [&](const std::map<std::string, size_t>& m) {
      auto it = m.find(category);
      return it == m.end() ? size_t{0} : it->second;
    };
    DistributionRow row;
    row.category = category;
    row.records = count(scoped);
    row.prevalence = Fraction(row.records, table.scope_records);
    row.delta = topic ? row.prevalence - Fraction(count(overall), overall_n) : 0.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

DistributionTable TopicDistribution(const LabeledIndex& index) {
  DistributionTable table;
  table.scope_records = index.records().size();
  std::map<std::string, size_t> counts;
  for (const LabeledRecord& r : index.records()) {
    if (r.topic_kept) ++counts[r.topic];
  }
  for (const std::string& category : index.kept_topics()) {
    DistributionRow row;
    row.category = category;
    row.records = counts[category];
    row.prevalence = Fraction(row.records, table.scope_records);
    table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    if (a.records != b.records) return a.records > b.records;
    return a.category < b.category;
  });
  return table;
}

std::vector<DistinctiveEntry> DistinctivePreferences(const LabeledIndex& index,
                                                     const std::string& topic, size_t k) {
  RequireKeptTopic(index, topic);
  if (k == 0) throw PreconditionError("k must be >= 1");
  size_t overall_n = 0;
  size_t topic_n = 0;
  const auto overall = CountPreferences(index, std::nullopt, &overall_n);
  const auto scoped = CountPreferences(index, topic, &topic_n);

  std::vector<DistinctiveEntry> entries;
  for (const std::string& category : index.kept_preferences()) {
    auto o = overall.find(category);
    if (o == overall.end() || o->second == 0) continue;
    auto s = scoped.find(category);
    const size_t in_topic = s == scoped.end() ? 0 : s->second;
    entries.push_back(
        {category, Fraction(in_topic, topic_n) / Fraction(o->second, overall_n)});
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.category < b.category;
  });
  if (entries.size() > k) entries.resize(k);
  return entries;
}

std::vector<std::pair<std::string, size_t>> GranularFrequency(
    const LabeledIndex& index, const std::string& preference_category,
    const std::optional<std::string>& topic) {
  std::map<std::string, size_t> counts;
  for (const LabeledRecord& r : index.records()) {
    if (topic && r.topic != *topic) continue;
    auto it = r.granular_by_preference.find(preference_category);
    if (it == r.granular_by_preference.end()) continue;
    for (const std::string& g : it->second) ++counts[g];
  }
  std::vector<std::pair<std::string, size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<std::string> MostPrevalentTopics(const LabeledIndex& index,
                                             const std::string& preference_category,
                                             size_t k) {
  std::vector<std::pair<std::string, double>> scored;
  for (const std::string& topic : index.kept_topics()) {
    size_t n = 0;
    const auto counts = CountPreferences(index, topic, &n);
    auto it = counts.find(preference_category);
    scored.emplace_back(topic, Fraction(it == counts.end() ? 0 : it->second, n));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].first);
  return out;
}

std::string DistributionCsv(const DistributionTable& table) {
  std::string out = "category,prevalence,delta,records\n";
  for (const DistributionRow& row : table.rows) {
    out += fmt::format("{},{:.6f},{:.6f},{}\n", CsvField(row.category), row.prevalence,
                       row.delta, row.records);
  }
  return out;
}

Json DistributionToJson(const DistributionTable& table) {
  Json rows = Json::array();
  for (const DistributionRow& row : table.rows) {
    rows.push_back({{"category", row.category},
                    {"prevalence", row.prevalence},
                    {"delta", row.delta},
                    {"records", row.records}});
  }
  return {{"scope", table.topic ? "topic" : "overall"},
          {"topic", table.topic ? Json(*table.topic) : Json(nullptr)},
          {"scope_records", table.scope_records},
          {"rows", std::move(rows)}};
}

void WriteAnalyticsReports(const LabeledIndex& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "granular");

  const DistributionTable overall = PreferenceDistribution(index);
  const DistributionTable topics = TopicDistribution(index);
  WriteFileAtomic(dir / "preference_distribution.csv", DistributionCsv(overall));
  WriteFileAtomic(dir / "topic_distribution.csv", DistributionCsv(topics));

  std::string preference_table =
      "category,prevalence,labels,most_prevalent_in,example_granular\n";
  for (const DistributionRow& row : overall.rows) {
    std::string examples;
    const auto granular = GranularFrequency(index, row.category);
    for (size_t i = 0; i < granular.size() && i < 2; ++i) {
      examples += (i ? "; " : "") + granular[i].first;
    }
    std::string prevalent_in;
    for (const std::string& t : MostPrevalentTopics(index, row.category, 2)) {
      prevalent_in += (prevalent_in.empty() ? "" : "; ") + t;
    }
    auto labels = index.preference_label_counts().find(row.category);
    preference_table += fmt::format(
        "{},{:.6f},{},{},{}\n", CsvField(row.category), row.prevalence,
        labels == index.preference_label_counts().end() ? 0 : labels->second,
        CsvField(prevalent_in), CsvField(examples));
  }
  WriteFileAtomic(dir / "preference_table.csv", preference_table);

  std::string topic_table = "topic,prevalence,labels,distinctive_1,distinctive_2\n";
  Json per_topic = Json::array();
  for (const DistributionRow& row : topics.rows) {
    const auto distinctive = DistinctivePreferences(index, row.category, 2);
    auto labels = index.topic_label_counts().find(row.category);
    topic_table += fmt::format(
        "{},{:.6f},{},{},{}\n", CsvField(row.category), row.prevalence,
        labels == index.topic_label_counts().end() ? 0 : labels->second,
        CsvField(distinctive.size() > 0 ? distinctive[0].category : ""),
        CsvField(distinctive.size() > 1 ? distinctive[1].category : ""));
    const DistributionTable scoped = PreferenceDistribution(index, row.category);
    WriteFileAtomic(dir / fmt::format("preference_distribution__{}.csv", Slug(row.category)),
                    DistributionCsv(scoped));
    per_topic.push_back(DistributionToJson(scoped));
  }
  WriteFileAtomic(dir / "topic_table.csv", topic_table);

  for (const std::string& preference : index.kept_preferences()) {
    Json frequencies = Json::object();
    auto to_json = [](const std::vector<std::pair<std::string, size_t>>& counts) {
      Json list = Json::array();
      for (const auto& [label, count] : counts) list.push_back({label, count});
      return list;
    };
    frequencies["overall"] = to_json(GranularFrequency(index, preference));
    for (const std::string& topic : index.kept_topics()) {
      auto counts = GranularFrequency(index, preference, topic);
      if (!counts.empty()) frequencies["by_topic"][topic] = to_json(counts);
    }
    WriteJsonFile(dir / "granular" / fmt::format("{}.json", Slug(preference)),
                  {{"preference", preference}, {"frequencies", std::move(frequencies)}});
  }

  WriteJsonFile(dir / "analytics.json", {{"overall", DistributionToJson(overall)},
                                         {"topics", DistributionToJson(topics)},
                                         {"by_topic", std::move(per_topic)}});
}

}  // namespace prefbasis
