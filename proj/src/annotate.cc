#include "prefbasis/annotate.h"

#include <map>
#include <optional>

#include "fmt/format.h"
#include "prefbasis/batch.h"
#include "prefbasis/error.h"

namespace prefbasis {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool IsTerminalPunct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

constexpr std::string_view kExtractionTemplate = R"(You are helping to explain the choices people make when comparing chatbot answers.

A user wrote the prompt below. Two AI assistants answered it, and the user then chose the response they preferred. Do not decide which response is better. Your task is to work out the reason for the user's choice.

### User prompt
{prompt}

### Response A
{response_a}

### Response B
{response_b}

### User's choice
The user preferred Response {chosen}.

Produce three things:
(A) A list of preferences that explain the user's choice. Each preference is a short, general phrase written from the perspective of wanting more of it (for example "conciseness" or "humor", never "too long"). For each preference also give a list of one or more granular preferences: concise phrases naming the specific feature of the chosen response that satisfied it.
(B) A list of one or more topics of the conversation. For each topic give a list of one or more granular sub-topics.
(C) A short description of a persona for a user who might make this choice.

Reply with one JSON object and nothing else, following exactly this schema:
{{"preferences": [{{"label": "<preference>", "granular": ["<granular preference>", ...]}}, ...], "topics": [{{"label": "<topic>", "granular": ["<granular topic>", ...]}}, ...], "persona": "<persona description>"}}
)";

std::string_view ExtractJsonObject(std::string_view text) {
  const size_t open = text.find('{');
  const size_t close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return {};
  }
  return text.substr(open, close - open + 1);
}

std::string RequireLabel(const Json& value, std::string_view what) {
  if (!value.is_string()) throw ValidationError(fmt::format("{} must be a string", what));
  std::string label = NormalizeLabel(value.get<std::string>());
  if (label.empty()) throw ValidationError(fmt::format("empty {}", what));
  return label;
}

}  // namespace

std::string NormalizeLabel(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  while (!out.empty() && (IsTerminalPunct(out.back()) || IsSpace(out.back()))) {
    out.pop_back();
  }
  return out;
}

std::string BuildExtractionPrompt(const ComparisonRecord& record) {
  if (record.winner != Winner::kA && record.winner != Winner::kB) {
    throw PreconditionError(fmt::format(
        "record {} is a tie; extraction needs a chosen response", record.record_id));
  }
  return fmt::format(kExtractionTemplate, fmt::arg("prompt", record.prompt),
                     fmt::arg("response_a", record.response_a),
                     fmt::arg("response_b", record.response_b),
                     fmt::arg("chosen", record.winner == Winner::kA ? "A" : "B"));
}

Annotation ParseExtractionResponse(std::string_view text, std::string record_id) {
  const std::string_view body = ExtractJsonObject(text);
  if (body.empty()) throw ParseError("no JSON object in extraction output", std::string(text));
  Json root;
  try {
    root = Json::parse(body);
  } catch (const Json::exception& e) {
    throw ParseError(fmt::format("extraction output is not valid JSON: {}", e.what()),
                     std::string(text));
  }
  if (!root.is_object() || !root.contains("preferences") || !root["preferences"].is_array() ||
      !root.contains("topics") || !root["topics"].is_array()) {
    throw ParseError("extraction output lacks 'preferences'/'topics' arrays",
                     std::string(text));
  }

  Annotation annotation;
  annotation.record_id = std::move(record_id);
  for (const Json& item : root["preferences"]) {
    if (!item.is_object() || !item.contains("label")) {
      throw ValidationError("preference entry must be an object with a label");
    }
    PreferenceEntry entry;
    entry.label = RequireLabel(item["label"], "preference label");
    const Json granular = item.value("granular", Json::array());
    if (!granular.is_array()) throw ValidationError("'granular' must be an array");
    for (const Json& g : granular) {
      if (!g.is_string()) throw ValidationError("granular preference must be a string");
      std::string normalized = NormalizeLabel(g.get<std::string>());
      if (!normalized.empty()) entry.granular.push_back(std::move(normalized));
    }
    if (entry.granular.empty()) {
      throw ValidationError(
          fmt::format("preference '{}' has no granular preferences", entry.label));
    }
    annotation.preferences.push_back(std::move(entry));
  }
  // Only high-level topics are kept; granular topics are discarded.
  for (const Json& item : root["topics"]) {
    if (item.is_object()) {
      if (!item.contains("label")) throw ValidationError("topic entry lacks a label");
      annotation.topics.push_back(RequireLabel(item["label"], "topic label"));
    } else {
      annotation.topics.push_back(RequireLabel(item, "topic label"));
    }
  }
  if (annotation.preferences.empty()) throw ValidationError("no preferences extracted");
  if (annotation.topics.empty()) throw ValidationError("no topics extracted");
  if (root.contains("persona") && root["persona"].is_string()) {
    annotation.persona = root["persona"].get<std::string>();
  }
  return annotation;
}

Json AnnotationToJson(const Annotation& annotation) {
  Json preferences = Json::array();
  for (const PreferenceEntry& entry : annotation.preferences) {
    preferences.push_back({{"label", entry.label}, {"granular", entry.granular}});
  }
  return {{"record_id", annotation.record_id},
          {"preferences", std::move(preferences)},
          {"topics", annotation.topics},
          {"persona", annotation.persona}};
}

Annotation AnnotationFromJson(const Json& row) {
  Annotation annotation;
  try {
    annotation.record_id = row.at("record_id").get<std::string>();
    for (const Json& item : row.at("preferences")) {
      annotation.preferences.push_back(
          {item.at("label").get<std::string>(),
           item.at("granular").get<std::vector<std::string>>()});
    }
    annotation.topics = row.at("topics").get<std::vector<std::string>>();
    annotation.persona = row.value("persona", "");
  } catch (const Json::exception& e) {
    throw ValidationError(fmt::format("bad annotation row: {}", e.what()));
  }
  return annotation;
}

std::vector<Annotation> ReadAnnotations(const std::filesystem::path& path) {
  std::vector<Annotation> annotations;
  const std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      annotations.push_back(AnnotationFromJson(Json::parse(lines[i])));
    } catch (const Json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), i + 1, e.what()));
    }
  }
  return annotations;
}

void WriteAnnotations(const std::filesystem::path& path,
                      const std::vector<Annotation>& annotations) {
  std::vector<Json> rows;
  rows.reserve(annotations.size());
  for (const Annotation& a : annotations) rows.push_back(AnnotationToJson(a));
  WriteJsonLines(path, rows);
}

void WriteAnnotationFailures(const std::filesystem::path& path,
                             const std::vector<AnnotationFailure>& failures) {
  std::vector<Json> rows;
  rows.reserve(failures.size());
  for (const AnnotationFailure& f : failures) {
    rows.push_back({{"record_id", f.record_id}, {"reason", f.reason}, {"raw", f.raw_text}});
  }
  WriteJsonLines(path, rows);
}

AnnotationSet AnnotateCorpus(const Corpus& corpus, Provider& provider,
                             const ProviderConfig& config, const AnnotateOptions& options) {
  config.Validate();
  std::map<std::string, size_t> index_of;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (IsTie(corpus[i].winner)) {
      throw PreconditionError(fmt::format(
          "record {} is a tie; filter the corpus before annotating", corpus[i].record_id));
    }
    index_of[corpus[i].record_id] = i;
  }

  std::vector<std::optional<Annotation>> done(corpus.size());
  std::vector<std::optional<AnnotationFailure>> failed(corpus.size());

  std::unique_ptr<AppendLog> checkpoint;
  if (!options.checkpoint.empty()) {
    if (std::filesystem::exists(options.checkpoint)) {
      for (const std::string& line : ReadLines(options.checkpoint)) {
        // A torn final line from an interrupted run is simply redone.
        try {
          Annotation a = AnnotationFromJson(Json::parse(line));
          auto it = index_of.find(a.record_id);
          if (it != index_of.end()) done[it->second] = std::move(a);
        } catch (const std::exception&) {
        }
      }
    }
    checkpoint = std::make_unique<AppendLog>(options.checkpoint, /*durable=*/false);
  }

  std::vector<size_t> pending;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!done[i]) pending.push_back(i);
  }

  RateLimiter limiter(config.requests_per_second);
  RunBounded(pending.size(), config.max_parallel, [&](size_t p) {
    const size_t i = pending[p];
    const ComparisonRecord& record = corpus[i];
    ProviderRequest request{RequestKind::kExtract, BuildExtractionPrompt(record)};
    std::optional<Annotation> parsed;
    std::string last_raw;
    try {
      CompleteWithRetry(provider, request, config, &limiter, [&](const std::string& text) {
        last_raw = text;
        parsed = ParseExtractionResponse(text, record.record_id);
      });
      if (checkpoint) checkpoint->Append(ToLine(AnnotationToJson(*parsed)));
      done[i] = std::move(parsed);
    } catch (const ParseError& e) {
      failed[i] = AnnotationFailure{record.record_id, e.what(), e.raw_text()};
    } catch (const ProviderError& e) {
      failed[i] = AnnotationFailure{record.record_id, e.what(), {}};
    } catch (const ValidationError& e) {
      failed[i] = AnnotationFailure{record.record_id, e.what(), last_raw};
    }
  });

  AnnotationSet set;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (done[i]) {
      set.annotations.push_back(std::move(*done[i]));
    } else if (failed[i]) {
      set.failures.push_back(std::move(*failed[i]));
    }
  }
  return set;
}

}  // namespace prefbasis
