#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <string_view>

#include "fmt/format.h"
#include "prefbasis/annotate.h"
#include "prefbasis/cluster.h"
#include "prefbasis/error.h"
#include "prefbasis/provider.h"
#include "prefbasis/rng.h"

namespace prefbasis {
namespace {

struct Family {
  std::string_view category;
  double rate;  // chance a record carries this family
  std::span<const std::string_view> variants;
  std::span<const std::string_view> granular;
};

// Per-record inclusion rates for the preference vocabulary follow the shape
// of real Arena annotations: a few dominant generic preferences, a long tail.
constexpr std::string_view kClarityV[] = {"clarity", "clear explanation", "clarity of response"};
constexpr std::string_view kClarityG[] = {"situational awareness", "contextual and organizational clarity", "step-by-step explanation", "plain wording", "visual or spatial imagery"};
constexpr std::string_view kThoroughV[] = {"thoroughness", "thorough answer", "completeness"};
constexpr std::string_view kThoroughG[] = {"detail", "compositional depth", "covers edge cases", "multiple examples", "background information"};
constexpr std::string_view kAccuracyV[] = {"accuracy", "correct information", "factual accuracy"};
constexpr std::string_view kAccuracyG[] = {"precision", "accuracy in context application", "correct calculation", "correct date", "no hallucinated facts"};
constexpr std::string_view kConciseV[] = {"conciseness", "concise", "brevity"};
constexpr std::string_view kConciseG[] = {"single-line lambda function", "simplified explanation", "simplicity of language", "short answer", "no filler"};
constexpr std::string_view kRelevanceV[] = {"relevance", "relevant answer", "on-topic response"};
constexpr std::string_view kRelevanceG[] = {"relevance to query", "alignment with game themes", "relevance and accuracy", "addresses the question"};
constexpr std::string_view kEngagementV[] = {"engagement", "engaging tone", "engaging response"};
constexpr std::string_view kEngagementG[] = {"engagement and enthusiasm", "effective hook", "engagement with humor", "lively storytelling"};
constexpr std::string_view kInnovationV[] = {"innovation", "creativity", "originality"};
constexpr std::string_view kInnovationG[] = {"originality", "creative reasoning", "interpretation of creativity", "unexpected twist"};
constexpr std::string_view kPracticalV[] = {"practicality", "practical advice"};
constexpr std::string_view kPracticalG[] = {"practicality of suggestions", "practicality of solution", "actionable steps"};
constexpr std::string_view kInformativeV[] = {"informative", "informativeness"};
constexpr std::string_view kInformativeG[] = {"informative details", "educational approach", "useful facts"};
constexpr std::string_view kDiversityV[] = {"diversity", "variety of perspectives"};
constexpr std::string_view kDiversityG[] = {"variety in response options", "acknowledgment of diverse perspectives", "multiple viewpoints"};
constexpr std::string_view kComprehensionV[] = {"comprehension", "understanding of the user"};
constexpr std::string_view kComprehensionG[] = {"empathy and understanding in approach", "insight", "grasps intent"};
constexpr std::string_view kOrganizationV[] = {"organization", "structure"};
constexpr std::string_view kOrganizationG[] = {"list structure", "structure detail", "clear headings"};
constexpr std::string_view kFollowsV[] = {"follows instructions", "instruction following"};
constexpr std::string_view kFollowsG[] = {"adherence to requested steps", "alignment with given data", "respects word limit"};
constexpr std::string_view kCustomV[] = {"customization", "personalization"};
constexpr std::string_view kCustomG[] = {"personalized opinion", "personalized advice"};
constexpr std::string_view kConcentrationV[] = {"concentration", "focus"};
constexpr std::string_view kConcentrationG[] = {"focus on social aspects", "focus", "stays on the main point"};
constexpr std::string_view kHelpfulV[] = {"helpfulness", "helpful attitude"};
constexpr std::string_view kHelpfulG[] = {"assistance offering", "community support"};
constexpr std::string_view kHumorV[] = {"humor", "funny response"};
constexpr std::string_view kHumorG[] = {"humor involvement", "humor and wit", "playful pun"};
constexpr std::string_view kContextV[] = {"context", "contextual awareness"};
constexpr std::string_view kContextG[] = {"contextual", "contextual information"};
constexpr std::string_view kEnvironmentV[] = {"environment", "tone"};
constexpr std::string_view kEnvironmentG[] = {"tone and emotion", "tone and reassurance"};
constexpr std::string_view kDirectionV[] = {"direction", "guidance"};
constexpr std::string_view kDirectionG[] = {"decision-making", "guidance on decision making"};
constexpr std::string_view kEfficiencyV[] = {"efficiency", "efficient solution"};
constexpr std::string_view kEfficiencyG[] = {"performance and efficiency", "potential impact"};
constexpr std::string_view kSafetyV[] = {"safety", "harm avoidance"};
constexpr std::string_view kSafetyG[] = {"refuses dangerous request", "safety warning"};
constexpr std::string_view kFormalityV[] = {"formality", "formal register"};
constexpr std::string_view kFormalityG[] = {"formal greeting", "professional wording"};
constexpr std::string_view kCitationV[] = {"source citation", "references"};
constexpr std::string_view kCitationG[] = {"cites a source", "links to documentation"};

constexpr Family kPreferences[] = {
    {"Clarity", 0.4822, kClarityV, kClarityG},
    {"Thoroughness", 0.3916, kThoroughV, kThoroughG},
    {"Accuracy", 0.2853, kAccuracyV, kAccuracyG},
    {"Concise", 0.1532, kConciseV, kConciseG},
    {"Relevance", 0.1513, kRelevanceV, kRelevanceG},
    {"Engagement", 0.1115, kEngagementV, kEngagementG},
    {"Innovation", 0.0518, kInnovationV, kInnovationG},
    {"Practicality", 0.0409, kPracticalV, kPracticalG},
    {"Informative", 0.0408, kInformativeV, kInformativeG},
    {"Diversity", 0.0316, kDiversityV, kDiversityG},
    {"Comprehension", 0.0314, kComprehensionV, kComprehensionG},
    {"Organization", 0.0292, kOrganizationV, kOrganizationG},
    {"Follows Instructions", 0.0269, kFollowsV, kFollowsG},
    {"Customization", 0.0171, kCustomV, kCustomG},
    {"Concentration", 0.0168, kConcentrationV, kConcentrationG},
    {"Helpfulness", 0.0165, kHelpfulV, kHelpfulG},
    {"Humor", 0.0138, kHumorV, kHumorG},
    {"Context", 0.0132, kContextV, kContextG},
    {"Environment", 0.0130, kEnvironmentV, kEnvironmentG},
    {"Direction", 0.0116, kDirectionV, kDirectionG},
    {"Efficiency", 0.0113, kEfficiencyV, kEfficiencyG},
    {"Safety", 0.0060, kSafetyV, kSafetyG},
    {"Formality", 0.0040, kFormalityV, kFormalityG},
    {"Source Citation", 0.0030, kCitationV, kCitationG},
};

struct TopicFamily {
  std::string_view category;
  double weight;
  std::span<const std::string_view> variants;
};

constexpr std::string_view kEngV[] = {"engineering", "technology", "software engineering"};
constexpr std::string_view kArtsV[] = {"arts", "humanities", "creative writing"};
constexpr std::string_view kCsV[] = {"computer science", "artificial intelligence", "programming"};
constexpr std::string_view kBusinessV[] = {"business", "finance", "marketing"};
constexpr std::string_view kSocialV[] = {"social sciences", "sociology"};
constexpr std::string_view kLanguageV[] = {"language", "translation", "communication"};
constexpr std::string_view kHealthV[] = {"health", "medicine"};
constexpr std::string_view kWritingV[] = {"writing", "literature"};
constexpr std::string_view kPsychV[] = {"psychology", "mental health"};
constexpr std::string_view kPhilV[] = {"philosophy", "ethics"};
constexpr std::string_view kCareerV[] = {"career advice", "personal development"};
constexpr std::string_view kEducationV[] = {"education", "teaching"};
constexpr std::string_view kHistoryV[] = {"history", "historical events"};
constexpr std::string_view kPoliticsV[] = {"politics", "government"};
constexpr std::string_view kScienceV[] = {"physics", "biology", "chemistry"};
constexpr std::string_view kCultureV[] = {"culture", "society"};
constexpr std::string_view kSportsV[] = {"sports", "football"};
constexpr std::string_view kLeisureV[] = {"hobbies", "gaming"};
constexpr std::string_view kGeneralV[] = {"general knowledge", "trivia"};
constexpr std::string_view kCreativityV[] = {"innovation", "brainstorming"};
constexpr std::string_view kFoodV[] = {"cooking", "agriculture"};
constexpr std::string_view kTravelV[] = {"travel", "tourism"};
constexpr std::string_view kReligionV[] = {"religion", "theology"};

constexpr TopicFamily kTopics[] = {
    {"Engineering and Technology", 0.2743, kEngV},
    {"Arts and Humanities", 0.1748, kArtsV},
    {"Computer Science / AI", 0.0992, kCsV},
    {"Business", 0.0642, kBusinessV},
    {"Social Sciences", 0.0473, kSocialV},
    {"Language and Communication", 0.0466, kLanguageV},
    {"Health", 0.0350, kHealthV},
    {"Writing and Literature", 0.0346, kWritingV},
    {"Psychology", 0.0310, kPsychV},
    {"Philosophy", 0.0286, kPhilV},
    {"Career and Personal Development", 0.0265, kCareerV},
    {"Education", 0.0261, kEducationV},
    {"History", 0.0228, kHistoryV},
    {"Politics", 0.0227, kPoliticsV},
    {"Natural Sciences", 0.0170, kScienceV},
    {"Culture and Society", 0.0115, kCultureV},
    {"Sports", 0.0113, kSportsV},
    {"Leisure and Hobbies", 0.0086, kLeisureV},
    {"General Knowledge", 0.0069, kGeneralV},
    {"Creativity / Innovation", 0.0055, kCreativityV},
    {"Agriculture / Food", 0.0055, kFoodV},
    {"Travel", 0.0040, kTravelV},
    {"Religion", 0.0030, kReligionV},
};

// One-off preferences that the clusterer turns into singleton categories.
constexpr std::string_view kLongTail[] = {
    "haiku form",        "emoji usage",         "rhyming couplets",   "ascii art",
    "pirate voice",      "use of metric units", "british spelling",   "markdown tables",
    "code comments",     "no apologies",        "first-person voice", "bullet-free prose",
    "latex formatting",  "use of analogies",    "historical anecdote", "sarcasm",
};

constexpr std::string_view kPersonas[] = {
    "a busy software developer who wants quick answers",
    "a student looking for thorough explanations",
    "a hobbyist writer who enjoys playful responses",
    "a professional who values accurate, well-sourced information",
    "a curious generalist who prefers clear and simple language",
};

template <typename T>
const T& Pick(Rng& rng, std::span<const T> items) {
  return items[rng.UniformIndex(items.size())];
}

// Surface variation that normalization must undo.
std::string Decorate(Rng& rng, std::string_view label) {
  std::string out(label);
  switch (rng.UniformIndex(4)) {
    case 0:
      break;
    case 1:
      if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 32);
      break;
    case 2:
      out += ".";
      break;
    case 3:
      out = " " + out + " ";
      break;
  }
  return out;
}

const std::map<std::string, std::string>& VariantToCategory() {
  static const auto* table = [] {
    auto* t = new std::map<std::string, std::string>();
    for (const Family& f : kPreferences) {
      for (std::string_view v : f.variants) (*t)[NormalizeLabel(v)] = std::string(f.category);
    }
    for (const TopicFamily& f : kTopics) {
      for (std::string_view v : f.variants) {
        (*t)[NormalizeLabel(v) + "\x1f" "topic"] = std::string(f.category);
      }
    }
    return t;
  }();
  return *table;
}

std::string TitleCase(std::string_view label) {
  std::string out(label);
  bool start = true;
  for (char& c : out) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 32);
    start = (c == ' ' || c == '-' || c == '/');
  }
  return out;
}

Json ExtractJsonAfter(const std::string& prompt, std::string_view marker) {
  const size_t at = prompt.find(marker);
  if (at == std::string::npos) return Json::array();
  const size_t start = at + marker.size();
  const size_t end = prompt.find('\n', start);
  try {
    return Json::parse(prompt.substr(start, end == std::string::npos ? end : end - start));
  } catch (const Json::exception&) {
    return Json::array();
  }
}

}  // namespace

std::string MockProvider::Complete(const ProviderRequest& request) {
  switch (request.kind) {
    case RequestKind::kExtract:
      return Extract(request.prompt);
    case RequestKind::kCluster:
      return Cluster(request.prompt);
    case RequestKind::kJudge:
      return Judge(request.prompt);
  }
  throw ProviderError("mock: unknown request kind");
}

std::string MockProvider::Extract(const std::string& prompt) const {
  Rng rng(DeriveSeed(seed_, prompt));
  auto weighted_topic = [&]() -> const TopicFamily& {
    double total = 0;
    for (const TopicFamily& t : kTopics) total += t.weight;
    double u = rng.UniformReal() * total;
    for (const TopicFamily& t : kTopics) {
      if ((u -= t.weight) < 0) return t;
    }
    return kTopics[0];
  };
  const TopicFamily& primary = weighted_topic();

  // Granular phrases often name the subject matter ("plain wording for
  // cooking"), which keeps the per-topic pools apart as in real annotations.
  Json preferences = Json::array();
  auto add_family = [&](const Family& f) {
    Json granular = Json::array();
    const size_t n = 1 + rng.UniformIndex(2);
    for (size_t k = 0; k < n; ++k) {
      std::string phrase(Pick(rng, f.granular));
      if (rng.Bernoulli(0.6)) {
        phrase = fmt::format("{} for {}", phrase, Pick(rng, primary.variants));
      }
      granular.push_back(Decorate(rng, phrase));
    }
    preferences.push_back({{"label", Decorate(rng, Pick(rng, f.variants))},
                           {"granular", std::move(granular)}});
  };
  for (const Family& f : kPreferences) {
    if (preferences.size() < 4 && rng.Bernoulli(f.rate)) add_family(f);
  }
  if (preferences.empty()) add_family(kPreferences[rng.UniformIndex(5)]);
  if (rng.Bernoulli(0.04)) {
    std::string_view tail = Pick(rng, std::span<const std::string_view>(kLongTail));
    preferences.push_back({{"label", tail}, {"granular", Json::array({fmt::format("{} requested", tail)})}});
  }

  Json topics = Json::array();
  topics.push_back({{"label", Decorate(rng, Pick(rng, primary.variants))},
                    {"granular", Json::array({"general"})}});
  if (rng.Bernoulli(0.3)) {
    const TopicFamily& secondary = weighted_topic();
    topics.push_back({{"label", Pick(rng, secondary.variants)}, {"granular", Json::array()}});
  }

  Json reply = {{"preferences", std::move(preferences)},
                {"topics", std::move(topics)},
                {"persona", Pick(rng, std::span<const std::string_view>(kPersonas))}};
  return reply.dump();
}

std::string MockProvider::Cluster(const std::string& prompt) const {
  const Json items = ExtractJsonAfter(prompt, kClusterItemsMarker);
  const Json inventory = ExtractJsonAfter(prompt, kClusterCategoriesMarker);
  const bool topics = prompt.find(kClusterTopicKindMarker) != std::string::npos;

  std::map<std::string, std::string> existing;
  for (const Json& c : inventory) {
    if (c.is_string()) existing[NormalizeLabel(c.get<std::string>())] = c.get<std::string>();
  }
  Json assignments = Json::object();
  for (const Json& item : items) {
    if (!item.is_string()) continue;
    const std::string label = item.get<std::string>();
    const std::string key = NormalizeLabel(label) + (topics ? "\x1f" "topic" : "");
    auto known = VariantToCategory().find(key);
    std::string category = known != VariantToCategory().end() ? known->second : TitleCase(label);
    auto reuse = existing.find(NormalizeLabel(category));
    if (reuse != existing.end()) category = reuse->second;
    assignments[label] = category;
  }
  return Json{{"assignments", std::move(assignments)}}.dump();
}

std::string MockProvider::Judge(const std::string& prompt) const {
  Rng rng(DeriveSeed(seed_, prompt));
  std::array<int, 6> positions = {1, 2, 3, 4, 5, 6};
  std::vector<int> order(positions.begin(), positions.end());
  rng.Shuffle(order);
  const size_t count = 1 + rng.UniformIndex(2);
  std::vector<int> chosen(order.begin(), order.begin() + static_cast<long>(count));
  std::sort(chosen.begin(), chosen.end());
  std::string out;
  for (size_t i = 0; i < chosen.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(chosen[i]);
  }
  return out;
}

}  // namespace prefbasis
