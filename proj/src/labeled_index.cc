#include "prefbasis/labeled_index.h"

#include <algorithm>

#include "fmt/format.h"
#include "prefbasis/error.h"

namespace prefbasis {
namespace {

const std::string& Lookup(const CategoryMap& map, const std::string& label,
                          const std::string& record_id) {
  auto it = map.assignments.find(label);
  if (it == map.assignments.end()) {
    throw ValidationError(fmt::format("{} label '{}' (record {}) is not in the category map",
                                      LabelKindName(map.kind), label, record_id));
  }
  return it->second;
}

}  // namespace

LabeledIndex::LabeledIndex(std::span<const Annotation> annotations,
                           const CategoryMap& preference_map, const Basis& preference_basis,
                           const CategoryMap& topic_map, const Basis& topic_basis) {
  if (preference_map.kind != LabelKind::kPreference || preference_basis.kind != LabelKind::kPreference) {
    throw PreconditionError("preference map/basis has the wrong kind");
  }
  if (topic_map.kind != LabelKind::kTopic || topic_basis.kind != LabelKind::kTopic) {
    throw PreconditionError("topic map/basis has the wrong kind");
  }
  for (const CategoryPrevalence& c : preference_basis.kept) {
    kept_preferences_.push_back(c.category);
    kept_preference_set_.insert(c.category);
  }
  for (const CategoryPrevalence& c : topic_basis.kept) {
    kept_topics_.push_back(c.category);
    kept_topic_set_.insert(c.category);
  }
  for (const auto& [label, category] : preference_map.assignments) ++preference_label_counts_[category];
  for (const auto& [label, category] : topic_map.assignments) ++topic_label_counts_[category];

  records_.reserve(annotations.size());
  for (const Annotation& a : annotations) {
    LabeledRecord record;
    record.record_id = a.record_id;
    for (const PreferenceEntry& p : a.preferences) {
      const std::string& category = Lookup(preference_map, p.label, a.record_id);
      std::vector<std::string>& granular = record.granular_by_preference[category];
      for (const std::string& g : p.granular) {
        if (std::find(granular.begin(), granular.end(), g) == granular.end()) {
          granular.push_back(g);
        }
      }
      if (kept_preference_set_.count(category) != 0) record.kept_preferences.insert(category);
    }
    for (const std::string& t : a.topics) {
      const std::string& category = Lookup(topic_map, t, a.record_id);
      if (record.topic.empty()) record.topic = category;
    }
    record.topic_kept = kept_topic_set_.count(record.topic) != 0;
    if (!position_.emplace(record.record_id, records_.size()).second) {
      throw ValidationError(fmt::format("duplicate annotation for record {}", record.record_id));
    }
    records_.push_back(std::move(record));
  }
}

const LabeledRecord* LabeledIndex::Find(const std::string& record_id) const {
  auto it = position_.find(record_id);
  return it == position_.end() ? nullptr : &records_[it->second];
}

bool LabeledIndex::IsKeptPreference(const std::string& category) const {
  return kept_preference_set_.count(category) != 0;
}

bool LabeledIndex::IsKeptTopic(const std::string& category) const {
  return kept_topic_set_.count(category) != 0;
}

}  // namespace prefbasis
