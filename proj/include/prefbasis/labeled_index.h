#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefbasis/annotate.h"
#include "prefbasis/cluster.h"

namespace prefbasis {

// One annotated record with its labels resolved to categories.
struct LabeledRecord {
  std::string record_id;
  // Every preference category of the record (kept or residual) mapped to the
  // granular labels attached to its raw labels, first-seen order, no repeats.
  std::map<std::string, std::vector<std::string>> granular_by_preference;
  std::set<std::string> kept_preferences;
  // The single topic category used for conditioning: the category of the
  // first-listed raw topic. Later topics are still checked against the map.
  std::string topic;
  bool topic_kept = false;
};

// Annotations joined with both category maps and bases. Built once and shared
// read-only by analytics, benchmark construction and pElo.
class LabeledIndex {
 public:
  LabeledIndex(std::span<const Annotation> annotations, const CategoryMap& preference_map,
               const Basis& preference_basis, const CategoryMap& topic_map,
               const Basis& topic_basis);

  const std::vector<LabeledRecord>& records() const { return records_; }
  const LabeledRecord* Find(const std::string& record_id) const;

  // Kept categories in basis order (descending prevalence).
  const std::vector<std::string>& kept_preferences() const { return kept_preferences_; }
  const std::vector<std::string>& kept_topics() const { return kept_topics_; }

  bool IsKeptPreference(const std::string& category) const;
  bool IsKeptTopic(const std::string& category) const;

  // Raw labels per category, for "# of labels" style reporting.
  const std::map<std::string, size_t>& preference_label_counts() const {
    return preference_label_counts_;
  }
  const std::map<std::string, size_t>& topic_label_counts() const {
    return topic_label_counts_;
  }

 private:
  std::vector<LabeledRecord> records_;
  std::map<std::string, size_t> position_;
  std::vector<std::string> kept_preferences_;
  std::vector<std::string> kept_topics_;
  std::set<std::string> kept_preference_set_;
  std::set<std::string> kept_topic_set_;
  std::map<std::string, size_t> preference_label_counts_;
  std::map<std::string, size_t> topic_label_counts_;
};

}  // namespace prefbasis
