#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefbasis/annotate.h"
#include "prefbasis/error.h"
#include "prefbasis/provider.h"

namespace prefbasis {

enum class LabelKind { kPreference, kTopic };

std::string_view LabelKindName(LabelKind kind);
LabelKind LabelKindFromName(std::string_view name);

// Raw label -> category, total over the clustered label set.
struct CategoryMap {
  LabelKind kind = LabelKind::kPreference;
  std::map<std::string, std::string> assignments;
  std::set<std::string> categories;
};

struct CategoryPrevalence {
  std::string category;
  double prevalence = 0.0;  // fraction of annotated records
  size_t records = 0;

  bool operator==(const CategoryPrevalence&) const = default;
};

struct Basis {
  LabelKind kind = LabelKind::kPreference;
  double threshold = 0.0;
  std::vector<CategoryPrevalence> kept;      // descending prevalence
  std::vector<CategoryPrevalence> residual;  // descending prevalence
  double coverage = 0.0;

  bool IsKept(const std::string& category) const;
};

// Prompt markers shared with the mock provider, which reads the JSON that
// follows each of them on the same line.
inline constexpr std::string_view kClusterCategoriesMarker = "Existing categories (JSON): ";
inline constexpr std::string_view kClusterItemsMarker = "Items (JSON): ";
inline constexpr std::string_view kClusterTopicKindMarker = "conversation topics";

std::string BuildClusterPrompt(LabelKind kind, std::span<const std::string> batch,
                               const std::set<std::string>& inventory);

// Returns assignments for items of `batch` found in the reply; anything else
// in the reply is ignored. Throws ParseError for unusable structure.
std::map<std::string, std::string> ParseClusterResponse(std::string_view text,
                                                        std::span<const std::string> batch);

struct ClusterOptions {
  size_t batch_limit = 200;
  uint64_t seed = 0;
  int max_extra_rounds = 3;
  // Partial progress is written here after every round and on abort; an
  // existing file resumes the run. Removed once clustering completes.
  std::filesystem::path state_path;
  ProviderConfig provider;
};

// Raised when labels remain unassigned after the last allowed round.
class ClusterIncomplete : public Error {
 public:
  ClusterIncomplete(const std::string& what, std::vector<std::string> stragglers)
      : Error(what), stragglers_(std::move(stragglers)) {}

  const std::vector<std::string>& stragglers() const { return stragglers_; }

 private:
  std::vector<std::string> stragglers_;
};

// Labels are presented in seeded random batches of at most batch_limit,
// together with the categories minted so far. Each label is assigned once.
CategoryMap ClusterLabels(const std::set<std::string>& labels, LabelKind kind,
                          Provider& provider, const ClusterOptions& options);

// Unique raw labels of one kind across the annotations.
std::set<std::string> CollectLabels(std::span<const Annotation> annotations, LabelKind kind);

// Categories of one annotation's labels of `kind`. Throws ValidationError
// for a label absent from the map.
std::set<std::string> RecordCategories(const Annotation& annotation, const CategoryMap& map);

// Record-based prevalence split at `threshold` (kept iff prevalence >= threshold).
Basis RefineByThreshold(const CategoryMap& map, std::span<const Annotation> annotations,
                        double threshold);

// Fraction of unique raw labels whose category is kept.
double Coverage(const Basis& basis, const CategoryMap& map);

Json CategoryMapToJson(const CategoryMap& map);
CategoryMap CategoryMapFromJson(const Json& json);
Json BasisToJson(const Basis& basis, const CategoryMap& map);
Basis BasisFromJson(const Json& json);

}  // namespace prefbasis
