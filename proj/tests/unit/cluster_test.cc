#include "prefbasis/cluster.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "prefbasis/rng.h"
#include "test_util.h"

namespace prefbasis {
namespace {

using testing::FastConfig;
using testing::FnProvider;

Json JsonAfter(const std::string& prompt, std::string_view marker) {
  const size_t at = prompt.find(marker);
  EXPECT_NE(at, std::string::npos);
  const size_t start = at + marker.size();
  return Json::parse(prompt.substr(start, prompt.find('\n', start) - start));
}

// Category = first character upper-cased, plus " Group".
std::string FirstLetterCategory(const std::string& label) {
  return std::string(1, static_cast<char>(std::toupper(label[0]))) + " Group";
}

std::string AssignAll(const ProviderRequest& r,
                      const std::function<std::string(const std::string&)>& category) {
  Json assignments = Json::object();
  for (const Json& item : JsonAfter(r.prompt, kClusterItemsMarker)) {
    assignments[item.get<std::string>()] = category(item.get<std::string>());
  }
  return Json{{"assignments", assignments}}.dump();
}

std::set<std::string> Labels(size_t n, uint64_t seed) {
  std::set<std::string> out;
  Rng rng(seed);
  while (out.size() < n) {
    std::string label;
    for (int i = 0; i < 6; ++i) label.push_back(static_cast<char>('a' + rng.UniformIndex(26)));
    out.insert(label);
  }
  return out;
}

ClusterOptions Options(size_t batch_limit = 200) {
  ClusterOptions o;
  o.batch_limit = batch_limit;
  o.seed = 5;
  o.provider = FastConfig(1);
  return o;
}

TEST(ClusterLabels, SingleLabel) {
  FnProvider p([](const ProviderRequest& r) { return AssignAll(r, FirstLetterCategory); });
  const CategoryMap map = ClusterLabels({"humor"}, LabelKind::kPreference, p, Options());
  EXPECT_EQ(map.assignments.at("humor"), "H Group");
  EXPECT_EQ(map.categories, std::set<std::string>{"H Group"});
  EXPECT_EQ(p.calls(), 1);
}

TEST(ClusterLabels, EmptyInputIsPreconditionViolation) {
  FnProvider p([](const ProviderRequest&) { return std::string(); });
  EXPECT_THROW(ClusterLabels({}, LabelKind::kTopic, p, Options()), PreconditionError);
}

TEST(ClusterLabels, BatchLimitOutOfRange) {
  FnProvider p([](const ProviderRequest& r) { return AssignAll(r, FirstLetterCategory); });
  EXPECT_THROW(ClusterLabels({"a"}, LabelKind::kTopic, p, Options(250)), PreconditionError);
  EXPECT_THROW(ClusterLabels({"a"}, LabelKind::kTopic, p, Options(0)), PreconditionError);
  EXPECT_NO_THROW(ClusterLabels({"a"}, LabelKind::kTopic, p, Options(249)));
}

TEST(ClusterLabels, TotalAndBatchesRespectLimit) {
  const std::set<std::string> labels = Labels(1000, 1);
  std::vector<size_t> sizes;
  FnProvider p([&](const ProviderRequest& r) {
    sizes.push_back(JsonAfter(r.prompt, kClusterItemsMarker).size());
    return AssignAll(r, FirstLetterCategory);
  });
  const CategoryMap map = ClusterLabels(labels, LabelKind::kPreference, p, Options(200));
  EXPECT_EQ(sizes, (std::vector<size_t>{200, 200, 200, 200, 200}));
  ASSERT_EQ(map.assignments.size(), labels.size());
  for (const std::string& l : labels) {
    ASSERT_EQ(map.assignments.count(l), 1u);
    EXPECT_EQ(map.assignments.at(l), FirstLetterCategory(l));
    EXPECT_EQ(map.categories.count(map.assignments.at(l)), 1u);
  }
}

TEST(ClusterLabels, LaterBatchesSeeEarlierCategories) {
  const std::set<std::string> labels = Labels(30, 2);
  std::vector<Json> inventories;
  std::set<std::string> minted;
  FnProvider p([&](const ProviderRequest& r) {
    const Json inventory = JsonAfter(r.prompt, kClusterCategoriesMarker);
    for (const std::string& c : minted) {
      EXPECT_NE(std::find(inventory.begin(), inventory.end(), c), inventory.end()) << c;
    }
    inventories.push_back(inventory);
    const std::string out = AssignAll(r, FirstLetterCategory);
    for (const auto& [k, v] : Json::parse(out)["assignments"].items()) minted.insert(v);
    return out;
  });
  ClusterLabels(labels, LabelKind::kTopic, p, Options(10));
  ASSERT_EQ(inventories.size(), 3u);
  EXPECT_TRUE(inventories[0].empty());
  EXPECT_FALSE(inventories[2].empty());
}

TEST(ClusterLabels, CategorySpellingsMergeOnNormalizedForm) {
  int call = 0;
  FnProvider p([&](const ProviderRequest& r) {
    const bool first = call++ == 0;
    return AssignAll(r, [&](const std::string&) { return first ? "Code Style" : " code  style. "; });
  });
  const CategoryMap map = ClusterLabels({"a", "b", "c", "d"}, LabelKind::kPreference, p, Options(2));
  EXPECT_EQ(map.categories, std::set<std::string>{"Code Style"});
}

TEST(ClusterLabels, StragglersRaiseClusterIncomplete) {
  FnProvider stubborn([](const ProviderRequest& r) {
    Json assignments = Json::object();
    for (const Json& item : JsonAfter(r.prompt, kClusterItemsMarker)) {
      if (item != "zzz") assignments[item.get<std::string>()] = "Misc";
    }
    return Json{{"assignments", assignments}}.dump();
  });
  ClusterOptions o = Options(10);
  o.max_extra_rounds = 2;
  try {
    ClusterLabels({"aaa", "bbb", "zzz"}, LabelKind::kPreference, stubborn, o);
    FAIL();
  } catch (const ClusterIncomplete& e) {
    EXPECT_EQ(e.stragglers(), std::vector<std::string>{"zzz"});
  }
  EXPECT_EQ(stubborn.calls(), 3);  // 1 round + 2 extra
}

TEST(ClusterLabels, ResumesFromStateFile) {
  testing::TempDir dir;
  const std::set<std::string> labels = Labels(95, 3);
  ClusterOptions o = Options(20);
  o.provider.retry_budget = 0;
  o.state_path = dir / "state.json";

  int budget = 2;
  FnProvider dying([&](const ProviderRequest& r) {
    if (budget-- <= 0) throw ProviderError("connection reset");
    return AssignAll(r, FirstLetterCategory);
  });
  EXPECT_THROW(ClusterLabels(labels, LabelKind::kTopic, dying, o), ProviderError);
  ASSERT_TRUE(std::filesystem::exists(o.state_path));
  EXPECT_EQ(ReadJsonFile(o.state_path).at("assignments").size(), 40u);

  FnProvider healthy([](const ProviderRequest& r) { return AssignAll(r, FirstLetterCategory); });
  const CategoryMap resumed = ClusterLabels(labels, LabelKind::kTopic, healthy, o);
  EXPECT_EQ(healthy.calls(), 3);
  EXPECT_EQ(resumed.assignments.size(), labels.size());
  EXPECT_FALSE(std::filesystem::exists(o.state_path));

  // A preference run must not pick up topic state.
  WriteJsonFile(o.state_path, {{"kind", "topic"}, {"round", 0}, {"assignments", Json::object()}});
  EXPECT_THROW(ClusterLabels(labels, LabelKind::kPreference, healthy, o), ConfigError);
}

TEST(ClusterLabels, SameSeedSameMap) {
  const std::set<std::string> labels = Labels(120, 4);
  // Category depends on which batch a label landed in, so batching must repeat.
  auto run = [&] {
    int call = 0;
    FnProvider p([&](const ProviderRequest& r) {
      const int round = call++;
      return AssignAll(r, [&](const std::string&) { return "Batch " + std::to_string(round); });
    });
    return ClusterLabels(labels, LabelKind::kTopic, p, Options(50)).assignments;
  };
  EXPECT_EQ(run(), run());
}

TEST(ParseClusterResponse, IgnoresItemsOutsideTheBatch) {
  const std::vector<std::string> batch = {"a", "b"};
  const auto out = ParseClusterResponse(
      "sure: {\"assignments\": {\"a\": \"  Alpha   Cat \", \"c\": \"X\", \"b\": 3}}", batch);
  EXPECT_EQ(out, (std::map<std::string, std::string>{{"a", "Alpha Cat"}}));
  EXPECT_THROW(ParseClusterResponse("nothing", batch), ParseError);
  EXPECT_THROW(ParseClusterResponse("{\"a\":\"b\"}", batch), ParseError);
}

Annotation Ann(const std::string& id, std::vector<std::string> prefs,
               std::vector<std::string> topics = {"t"}) {
  Annotation a;
  a.record_id = id;
  for (auto& p : prefs) a.preferences.push_back({p, {"g"}});
  a.topics = std::move(topics);
  return a;
}

CategoryMap Map(LabelKind kind, std::map<std::string, std::string> assignments) {
  CategoryMap m;
  m.kind = kind;
  m.assignments = std::move(assignments);
  for (const auto& [l, c] : m.assignments) m.categories.insert(c);
  return m;
}

TEST(RefineByThreshold, ZeroThresholdKeepsEverything) {
  const CategoryMap map = Map(LabelKind::kPreference, {{"x", "X"}, {"y", "Y"}});
  const std::vector<Annotation> anns = {Ann("1", {"x"})};
  const Basis b = RefineByThreshold(map, anns, 0.0);
  EXPECT_EQ(b.kept.size(), 2u);
  EXPECT_TRUE(b.residual.empty());
  EXPECT_DOUBLE_EQ(b.coverage, 1.0);
}

TEST(RefineByThreshold, HundredRecordExample) {
  const CategoryMap map =
      Map(LabelKind::kPreference, {{"x", "X"}, {"x2", "X"}, {"y", "Y"}, {"z", "Z"}, {"w", "W"}});
  std::vector<Annotation> anns;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> prefs = {"w"};
    if (i < 5) prefs.push_back(i % 2 ? "x" : "x2");
    if (i == 0) prefs.push_back("x");  // same category twice counts once
    if (i == 7) prefs.push_back("z");
    anns.push_back(Ann(std::to_string(i), prefs));
  }
  const Basis b = RefineByThreshold(map, anns, 0.01);
  ASSERT_EQ(b.kept.size(), 3u);
  EXPECT_EQ(b.kept[0], (CategoryPrevalence{"W", 1.0, 100}));
  EXPECT_EQ(b.kept[1], (CategoryPrevalence{"X", 0.05, 5}));
  EXPECT_EQ(b.kept[2], (CategoryPrevalence{"Z", 0.01, 1}));
  ASSERT_EQ(b.residual.size(), 1u);
  EXPECT_EQ(b.residual[0], (CategoryPrevalence{"Y", 0.0, 0}));
  EXPECT_TRUE(b.IsKept("Z"));
  EXPECT_FALSE(b.IsKept("Y"));
}

TEST(RefineByThreshold, CoverageCountsLabels) {
  std::map<std::string, std::string> assignments;
  for (int i = 0; i < 7; ++i) assignments["k" + std::to_string(i)] = "Kept";
  for (int i = 0; i < 3; ++i) assignments["r" + std::to_string(i)] = "Rare";
  const CategoryMap map = Map(LabelKind::kPreference, assignments);
  std::vector<Annotation> anns;
  for (int i = 0; i < 10; ++i) anns.push_back(Ann(std::to_string(i), {"k0"}));
  const Basis b = RefineByThreshold(map, anns, 0.5);
  EXPECT_DOUBLE_EQ(b.coverage, 0.7);
  EXPECT_DOUBLE_EQ(Coverage(b, map), 0.7);
}

TEST(RefineByThreshold, InvalidThreshold) {
  const CategoryMap map = Map(LabelKind::kPreference, {{"x", "X"}});
  EXPECT_THROW(RefineByThreshold(map, {}, 1.5), PreconditionError);
  EXPECT_THROW(RefineByThreshold(map, {}, -0.1), PreconditionError);
}

TEST(RefineByThreshold, UnknownLabelIsValidationError) {
  const CategoryMap map = Map(LabelKind::kPreference, {{"x", "X"}});
  const std::vector<Annotation> anns = {Ann("1", {"nope"})};
  EXPECT_THROW(RefineByThreshold(map, anns, 0.1), ValidationError);
}

TEST(RefineByThreshold, TopicsUseTopicLabels) {
  const CategoryMap map = Map(LabelKind::kTopic, {{"math", "Math"}, {"code", "Coding"}});
  const std::vector<Annotation> anns = {Ann("1", {"p"}, {"math", "code"}), Ann("2", {"p"}, {"math"})};
  const Basis b = RefineByThreshold(map, anns, 0.6);
  ASSERT_EQ(b.kept.size(), 1u);
  EXPECT_EQ(b.kept[0].category, "Math");
  EXPECT_EQ(CollectLabels(anns, LabelKind::kTopic), (std::set<std::string>{"code", "math"}));
  EXPECT_EQ(CollectLabels(anns, LabelKind::kPreference), std::set<std::string>{"p"});
}

// Random maps and annotations for the structural properties.
struct RandomCase {
  CategoryMap map;
  std::vector<Annotation> annotations;
};

RandomCase MakeRandomCase(uint64_t seed) {
  Rng rng(seed);
  RandomCase rc;
  rc.map.kind = LabelKind::kPreference;
  const size_t n_labels = 1 + rng.UniformIndex(40);
  const size_t n_categories = 1 + rng.UniformIndex(12);
  std::vector<std::string> labels;
  for (size_t i = 0; i < n_labels; ++i) {
    labels.push_back("l" + std::to_string(i));
    rc.map.assignments[labels.back()] = "C" + std::to_string(rng.UniformIndex(n_categories));
    rc.map.categories.insert(rc.map.assignments[labels.back()]);
  }
  const size_t n_records = rng.UniformIndex(200);
  for (size_t r = 0; r < n_records; ++r) {
    std::vector<std::string> prefs;
    const size_t k = 1 + rng.UniformIndex(4);
    for (size_t j = 0; j < k; ++j) prefs.push_back(labels[rng.UniformIndex(labels.size())]);
    rc.annotations.push_back(Ann(std::to_string(r), prefs));
  }
  return rc;
}

TEST(RefineByThreshold, PartitionProperty) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const RandomCase rc = MakeRandomCase(seed);
    const double threshold = Rng(seed + 1000).UniformReal();
    const Basis b = RefineByThreshold(rc.map, rc.annotations, threshold);
    std::set<std::string> seen;
    for (const auto* list : {&b.kept, &b.residual}) {
      for (const CategoryPrevalence& c : *list) EXPECT_TRUE(seen.insert(c.category).second);
    }
    EXPECT_EQ(seen, rc.map.categories);
    for (const CategoryPrevalence& c : b.kept) EXPECT_GE(c.records * 1.0 + 1e-9, threshold * rc.annotations.size());
    for (const CategoryPrevalence& c : b.residual) EXPECT_LT(c.records * 1.0, threshold * rc.annotations.size());
    for (size_t i = 1; i < b.kept.size(); ++i) EXPECT_GE(b.kept[i - 1].records, b.kept[i].records);
  }
}

TEST(RefineByThreshold, KeptSetShrinksAsThresholdRises) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const RandomCase rc = MakeRandomCase(seed);
    std::set<std::string> previous = rc.map.categories;
    double previous_coverage = 1.0;
    for (double t : {0.0, 0.01, 0.05, 0.1, 0.3, 0.6, 1.0}) {
      const Basis b = RefineByThreshold(rc.map, rc.annotations, t);
      std::set<std::string> kept;
      for (const auto& c : b.kept) kept.insert(c.category);
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), kept.begin(), kept.end()));
      EXPECT_LE(b.coverage, previous_coverage + 1e-12);
      previous = kept;
      previous_coverage = b.coverage;
    }
  }
}

TEST(CategoryMapJson, RoundTrip) {
  const CategoryMap map = Map(LabelKind::kTopic, {{"math", "Math"}, {"code", "Coding"}});
  const CategoryMap back = CategoryMapFromJson(CategoryMapToJson(map));
  EXPECT_EQ(back.kind, map.kind);
  EXPECT_EQ(back.assignments, map.assignments);
  EXPECT_EQ(back.categories, map.categories);
  EXPECT_THROW(CategoryMapFromJson(Json{{"kind", "topic"}}), ValidationError);
}

TEST(BasisJson, RoundTrip) {
  const CategoryMap map = Map(LabelKind::kPreference, {{"x", "X"}, {"y", "Y"}});
  const std::vector<Annotation> anns = {Ann("1", {"x"}), Ann("2", {"x", "y"}), Ann("3", {"x"})};
  const Basis b = RefineByThreshold(map, anns, 0.5);
  const Basis back = BasisFromJson(BasisToJson(b, map));
  EXPECT_EQ(back.kind, b.kind);
  EXPECT_EQ(back.kept, b.kept);
  EXPECT_EQ(back.residual, b.residual);
  EXPECT_DOUBLE_EQ(back.threshold, 0.5);
  EXPECT_DOUBLE_EQ(back.coverage, 0.5);
}

}  // namespace
}  // namespace prefbasis
