#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prefbasis/io.h"
#include "prefbasis/labeled_index.h"

namespace prefbasis {

struct DistributionRow {
  std::string category;
  double prevalence = 0.0;
  double delta = 0.0;  // scoped prevalence minus overall prevalence
  size_t records = 0;
};

struct DistributionTable {
  std::optional<std::string> topic;  // nullopt = overall scope
  size_t scope_records = 0;
  std::vector<DistributionRow> rows;
};

// One row per kept preference, in basis order. With `topic`, prevalence is
// restricted to records conditioned on that (kept) topic.
DistributionTable PreferenceDistribution(const LabeledIndex& index,
                                         const std::optional<std::string>& topic = {});

// One row per kept topic, using each record's single conditioning topic.
DistributionTable TopicDistribution(const LabeledIndex& index);

struct DistinctiveEntry {
  std::string category;
  double ratio = 0.0;  // topic prevalence / overall prevalence
};

// Kept preferences ranked by descending ratio (ties alphabetical); categories
// absent overall are skipped. Returns at most k entries.
std::vector<DistinctiveEntry> DistinctivePreferences(const LabeledIndex& index,
                                                     const std::string& topic, size_t k);

// Granular label counts under a preference category, descending count with
// alphabetical tie-break; optionally restricted to one topic.
std::vector<std::pair<std::string, size_t>> GranularFrequency(
    const LabeledIndex& index, const std::string& preference_category,
    const std::optional<std::string>& topic = {});

// Topics in which a preference is most prevalent (descending, ties alphabetical).
std::vector<std::string> MostPrevalentTopics(const LabeledIndex& index,
                                             const std::string& preference_category, size_t k);

std::string DistributionCsv(const DistributionTable& table);
Json DistributionToJson(const DistributionTable& table);

// Writes every analytics export into `dir`.
void WriteAnalyticsReports(const LabeledIndex& index, const std::filesystem::path& dir);

}  // namespace prefbasis
