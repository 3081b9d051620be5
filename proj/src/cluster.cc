#include "prefbasis/cluster.h"

#include <algorithm>
#include <cmath>

#include "fmt/format.h"
#include "prefbasis/batch.h"
#include "prefbasis/rng.h"

namespace prefbasis {
namespace {

constexpr size_t kMaxBatch = 250;

// Trims and collapses whitespace without touching case.
std::string CleanCategory(std::string_view raw) {
  std::string out;
  bool space = false;
  for (char c : raw) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

struct ClusterState {
  int round = 0;
  std::map<std::string, std::string> assignments;
  std::set<std::string> categories;
};

void SaveState(const std::filesystem::path& path, LabelKind kind, const ClusterState& state) {
  if (path.empty()) return;
  WriteJsonFile(path, {{"kind", LabelKindName(kind)},
                       {"round", state.round},
                       {"assignments", state.assignments},
                       {"categories", state.categories}});
}

ClusterState LoadState(const std::filesystem::path& path, LabelKind kind,
                       const std::set<std::string>& labels) {
  ClusterState state;
  if (path.empty() || !std::filesystem::exists(path)) return state;
  const Json json = ReadJsonFile(path);
  if (LabelKindFromName(json.at("kind").get<std::string>()) != kind) {
    throw ConfigError(fmt::format("{} holds state for a different label kind", path.string()));
  }
  state.round = json.at("round").get<int>();
  for (const auto& [label, category] : json.at("assignments").items()) {
    if (labels.count(label) != 0) state.assignments[label] = category.get<std::string>();
  }
  for (const auto& [label, category] : state.assignments) state.categories.insert(category);
  return state;
}

void SortByPrevalence(std::vector<CategoryPrevalence>& rows) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.records != b.records) return a.records > b.records;
    return a.category < b.category;
  });
}

}  // namespace

std::string_view LabelKindName(LabelKind kind) {
  return kind == LabelKind::kPreference ? "preference" : "topic";
}

LabelKind LabelKindFromName(std::string_view name) {
  if (name == "preference") return LabelKind::kPreference;
  if (name == "topic") return LabelKind::kTopic;
  throw ValidationError(fmt::format("unknown label kind '{}'", name));
}

bool Basis::IsKept(const std::string& category) const {
  return std::any_of(kept.begin(), kept.end(),
                     [&](const CategoryPrevalence& c) { return c.category == category; });
}

std::string BuildClusterPrompt(LabelKind kind, std::span<const std::string> batch,
                               const std::set<std::string>& inventory) {
  const std::string_view what =
      kind == LabelKind::kPreference ? "user preferences" : kClusterTopicKindMarker;
  const Json items(std::vector<std::string>(batch.begin(), batch.end()));
  const Json categories(std::vector<std::string>(inventory.begin(), inventory.end()));
  return fmt::format(
      "You are organizing {what} extracted from conversations between users and AI "
      "assistants into a consistent set of high-level categories.\n"
      "\n"
      "Assign every item below to exactly one category. Reuse an existing category "
      "whenever one fits. Create a new category (one to three words, Title Case) only "
      "when none fits. Keep categories general enough to group related items.\n"
      "\n"
      "{categories_marker}{categories}\n"
      "{items_marker}{items}\n"
      "\n"
      "Reply with one JSON object and nothing else, mapping each item to its category:\n"
      "{{\"assignments\": {{\"<item>\": \"<category>\", ...}}}}\n",
      fmt::arg("what", what), fmt::arg("categories_marker", kClusterCategoriesMarker),
      fmt::arg("categories", ToLine(categories)), fmt::arg("items_marker", kClusterItemsMarker),
      fmt::arg("items", ToLine(items)));
}

std::map<std::string, std::string> ParseClusterResponse(std::string_view text,
                                                        std::span<const std::string> batch) {
  const size_t open = text.find('{');
  const size_t close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ParseError("no JSON object in clustering output", std::string(text));
  }
  Json root;
  try {
    root = Json::parse(text.substr(open, close - open + 1));
  } catch (const Json::exception& e) {
    throw ParseError(fmt::format("clustering output is not valid JSON: {}", e.what()),
                     std::string(text));
  }
  if (!root.is_object() || !root.contains("assignments") || !root["assignments"].is_object()) {
    throw ParseError("clustering output lacks an 'assignments' object", std::string(text));
  }
  const std::set<std::string> wanted(batch.begin(), batch.end());
  std::map<std::string, std::string> out;
  for (const auto& [item, category] : root["assignments"].items()) {
    if (wanted.count(item) == 0 || !category.is_string()) continue;
    std::string cleaned = CleanCategory(category.get<std::string>());
    if (!cleaned.empty()) out[item] = std::move(cleaned);
  }
  return out;
}

CategoryMap ClusterLabels(const std::set<std::string>& labels, LabelKind kind,
                          Provider& provider, const ClusterOptions& options) {
  if (labels.empty()) throw PreconditionError("no labels to cluster");
  if (options.batch_limit == 0 || options.batch_limit >= kMaxBatch) {
    throw PreconditionError(
        fmt::format("batch_limit must be in [1, {}), got {}", kMaxBatch, options.batch_limit));
  }
  if (options.max_extra_rounds < 0) throw PreconditionError("max_extra_rounds must be >= 0");
  options.provider.Validate();

  ClusterState state = LoadState(options.state_path, kind, labels);
  std::map<std::string, std::string> canonical;  // normalized -> spelling in use
  for (const std::string& c : state.categories) canonical.emplace(NormalizeLabel(c), c);

  const int max_rounds = static_cast<int>(
      (labels.size() + options.batch_limit - 1) / options.batch_limit) +
      options.max_extra_rounds;
  RateLimiter limiter(options.provider.requests_per_second);

  while (state.round < max_rounds) {
    std::vector<std::string> unassigned;
    for (const std::string& label : labels) {
      if (state.assignments.count(label) == 0) unassigned.push_back(label);
    }
    if (unassigned.empty()) break;

    Rng rng(DeriveSeed(options.seed, static_cast<uint64_t>(state.round)));
    rng.Shuffle(unassigned);
    unassigned.resize(std::min(unassigned.size(), options.batch_limit));
    std::sort(unassigned.begin(), unassigned.end());

    ProviderRequest request{RequestKind::kCluster,
                            BuildClusterPrompt(kind, unassigned, state.categories)};
    std::map<std::string, std::string> reply;
    try {
      CompleteWithRetry(provider, request, options.provider, &limiter,
                        [&](const std::string& text) {
                          reply = ParseClusterResponse(text, unassigned);
                        });
    } catch (const Error&) {
      SaveState(options.state_path, kind, state);
      throw;
    }
    for (auto& [label, category] : reply) {
      auto [it, inserted] = canonical.emplace(NormalizeLabel(category), category);
      state.assignments[label] = it->second;
      state.categories.insert(it->second);
    }
    ++state.round;
    SaveState(options.state_path, kind, state);
  }

  std::vector<std::string> stragglers;
  for (const std::string& label : labels) {
    if (state.assignments.count(label) == 0) stragglers.push_back(label);
  }
  if (!stragglers.empty()) {
    SaveState(options.state_path, kind, state);
    std::string preview;
    for (size_t i = 0; i < stragglers.size() && i < 10; ++i) {
      preview += (i ? ", " : "") + stragglers[i];
    }
    throw ClusterIncomplete(
        fmt::format("{} labels unassigned after {} rounds: {}{}", stragglers.size(),
                    max_rounds, preview, stragglers.size() > 10 ? ", ..." : ""),
        std::move(stragglers));
  }
  if (!options.state_path.empty()) std::filesystem::remove(options.state_path);

  CategoryMap map;
  map.kind = kind;
  map.assignments = std::move(state.assignments);
  for (const auto& [label, category] : map.assignments) map.categories.insert(category);
  return map;
}

std::set<std::string> CollectLabels(std::span<const Annotation> annotations, LabelKind kind) {
  std::set<std::string> labels;
  for (const Annotation& a : annotations) {
    if (kind == LabelKind::kPreference) {
      for (const PreferenceEntry& p : a.preferences) labels.insert(p.label);
    } else {
      labels.insert(a.topics.begin(), a.topics.end());
    }
  }
  return labels;
}

std::set<std::string> RecordCategories(const Annotation& annotation, const CategoryMap& map) {
  std::set<std::string> categories;
  auto lookup = [&](const std::string& label) {
    auto it = map.assignments.find(label);
    if (it == map.assignments.end()) {
      throw ValidationError(fmt::format("{} label '{}' (record {}) is not in the category map",
                                        LabelKindName(map.kind), label, annotation.record_id));
    }
    categories.insert(it->second);
  };
  if (map.kind == LabelKind::kPreference) {
    for (const PreferenceEntry& p : annotation.preferences) lookup(p.label);
  } else {
    for (const std::string& t : annotation.topics) lookup(t);
  }
  return categories;
}

Basis RefineByThreshold(const CategoryMap& map, std::span<const Annotation> annotations,
                        double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw PreconditionError(fmt::format("threshold must be in [0, 1], got {}", threshold));
  }
  std::map<std::string, size_t> counts;
  for (const std::string& c : map.categories) counts[c] = 0;
  for (const Annotation& a : annotations) {
    for (const std::string& c : RecordCategories(a, map)) ++counts[c];
  }

  const double n = static_cast<double>(annotations.size());
  Basis basis;
  basis.kind = map.kind;
  basis.threshold = threshold;
  for (const auto& [category, records] : counts) {
    CategoryPrevalence row{category, n > 0 ? static_cast<double>(records) / n : 0.0, records};
    // Compare counts against threshold * n with a tolerance so that e.g.
    // 1 record in 100 sits exactly at a 1% threshold.
    const bool kept = static_cast<double>(records) + 1e-9 >= threshold * n;
    (kept ? basis.kept : basis.residual).push_back(std::move(row));
  }
  SortByPrevalence(basis.kept);
  SortByPrevalence(basis.residual);
  basis.coverage = Coverage(basis, map);
  return basis;
}

double Coverage(const Basis& basis, const CategoryMap& map) {
  if (map.assignments.empty()) return 1.0;
  std::set<std::string> kept;
  for (const CategoryPrevalence& c : basis.kept) kept.insert(c.category);
  size_t covered = 0;
  for (const auto& [label, category] : map.assignments) covered += kept.count(category);
  return static_cast<double>(covered) / static_cast<double>(map.assignments.size());
}

Json CategoryMapToJson(const CategoryMap& map) {
  return {{"kind", LabelKindName(map.kind)},
          {"categories", map.categories},
          {"assignments", map.assignments}};
}

CategoryMap CategoryMapFromJson(const Json& json) {
  CategoryMap map;
  try {
    map.kind = LabelKindFromName(json.at("kind").get<std::string>());
    map.assignments = json.at("assignments").get<std::map<std::string, std::string>>();
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("bad category map: {}", e.what()));
  }
  for (const auto& [label, category] : map.assignments) map.categories.insert(category);
  if (json.contains("categories")) {
    for (const Json& c : json["categories"]) map.categories.insert(c.get<std::string>());
  }
  return map;
}

Json BasisToJson(const Basis& basis, const CategoryMap& map) {
  auto rows = [](const std::vector<CategoryPrevalence>& list) {
    Json out = Json::array();
    for (const CategoryPrevalence& c : list) {
      out.push_back(
          {{"category", c.category}, {"prevalence", c.prevalence}, {"records", c.records}});
    }
    return out;
  };
  return {{"kind", LabelKindName(basis.kind)},
          {"threshold", basis.threshold},
          {"coverage", basis.coverage},
          {"kept", rows(basis.kept)},
          {"residual", rows(basis.residual)},
          {"assignments", map.assignments}};
}

Basis BasisFromJson(const Json& json) {
  Basis basis;
  try {
    basis.kind = LabelKindFromName(json.at("kind").get<std::string>());
    basis.threshold = json.at("threshold").get<double>();
    basis.coverage = json.at("coverage").get<double>();
    for (const Json& row : json.at("kept")) {
      basis.kept.push_back({row.at("category").get<std::string>(),
                            row.at("prevalence").get<double>(),
                            row.value("records", size_t{0})});
    }
    for (const Json& row : json.at("residual")) {
      basis.residual.push_back({row.at("category").get<std::string>(),
                                row.at("prevalence").get<double>(),
                                row.value("records", size_t{0})});
    }
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("bad basis: {}", e.what()));
  }
  return basis;
}

}  // namespace prefbasis
