#include "prefbasis/corpus.h"

#include <unordered_set>

#include "fmt/format.h"
#include "prefbasis/error.h"

namespace prefbasis {
namespace {

class FieldReader {
 public:
  FieldReader(const Json& object, const FieldMap& field_map)
      : object_(object), field_map_(field_map) {}

  std::string SourceName(const std::string& canonical) const {
    auto it = field_map_.find(canonical);
    return it == field_map_.end() ? canonical : it->second;
  }

  const Json* Find(const std::string& canonical) const {
    auto it = object_.find(SourceName(canonical));
    if (it == object_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string RequireString(const std::string& canonical) const {
    const Json* value = Find(canonical);
    if (value == nullptr) throw ValidationError(MissingField(canonical));
    if (value->is_string()) return value->get<std::string>();
    if (value->is_number_integer()) return std::to_string(value->get<long long>());
    throw ValidationError(
        fmt::format("field '{}' must be a string", SourceName(canonical)));
  }

  std::string MissingField(const std::string& canonical) const {
    return fmt::format("missing field '{}'", SourceName(canonical));
  }

 private:
  const Json& object_;
  const FieldMap& field_map_;
};

// Returns the content of the n-th message with `role`, or nullopt.
std::optional<std::string> NthTurn(const Json& conversation, std::string_view role,
                                   int n) {
  int seen = 0;
  for (const Json& message : conversation) {
    if (!message.is_object()) continue;
    auto r = message.find("role");
    auto c = message.find("content");
    if (r == message.end() || c == message.end() || !r->is_string() || !c->is_string()) {
      continue;
    }
    if (r->get<std::string>() == role && seen++ == n) return c->get<std::string>();
  }
  return std::nullopt;
}

int CountTurns(const Json& conversation, std::string_view role) {
  int count = 0;
  for (const Json& message : conversation) {
    if (message.is_object() && message.value("role", "") == role) ++count;
  }
  return count;
}

ComparisonRecord ParseRecord(const Json& object, const FieldMap& field_map) {
  if (!object.is_object()) throw ValidationError("line is not a JSON object");
  FieldReader fields(object, field_map);
  ComparisonRecord record;
  record.record_id = fields.RequireString("record_id");
  if (record.record_id.empty()) throw ValidationError("empty record_id");

  const Json* conv_a = fields.Find("conversation_a");
  const Json* conv_b = fields.Find("conversation_b");
  const bool has_conversations =
      conv_a != nullptr && conv_b != nullptr && conv_a->is_array() && conv_b->is_array();

  if (fields.Find("prompt") != nullptr || !has_conversations) {
    record.prompt = fields.RequireString("prompt");
    record.response_a = fields.RequireString("response_a");
    record.response_b = fields.RequireString("response_b");
  } else {
    auto prompt = NthTurn(*conv_a, "user", 0);
    auto response_a = NthTurn(*conv_a, "assistant", 0);
    auto response_b = NthTurn(*conv_b, "assistant", 0);
    if (!prompt) throw ValidationError("conversation_a has no user turn");
    if (!response_a) throw ValidationError("conversation_a has no assistant turn");
    if (!response_b) throw ValidationError("conversation_b has no assistant turn");
    record.prompt = *prompt;
    record.response_a = *response_a;
    record.response_b = *response_b;
  }
  if (has_conversations) {
    record.raw_conversations = Json{{"conversation_a", *conv_a},
                                    {"conversation_b", *conv_b}};
  }

  const Json* winner = fields.Find("winner");
  if (winner == nullptr) throw ValidationError(fields.MissingField("winner"));
  if (!winner->is_string()) throw ValidationError("field 'winner' must be a string");
  auto parsed = WinnerFromWire(winner->get<std::string>());
  if (!parsed) {
    throw ValidationError(fmt::format("invalid winner '{}'", winner->get<std::string>()));
  }
  record.winner = *parsed;

  record.model_a = fields.RequireString("model_a");
  record.model_b = fields.RequireString("model_b");
  record.language = fields.RequireString("language");

  const Json* turn = fields.Find("turn");
  if (turn != nullptr) {
    if (!turn->is_number_integer() || turn->get<long long>() < 1) {
      throw ValidationError("field 'turn' must be a positive integer");
    }
    record.turn_count = static_cast<int>(turn->get<long long>());
  } else if (has_conversations) {
    record.turn_count = std::max(1, CountTurns(*conv_a, "user"));
  } else {
    throw ValidationError(fields.MissingField("turn"));
  }
  return record;
}

}  // namespace

std::string_view WinnerToWire(Winner winner) {
  switch (winner) {
    case Winner::kA:
      return "model_a";
    case Winner::kB:
      return "model_b";
    case Winner::kTie:
      return "tie";
    case Winner::kTieBothBad:
      return "tie (bothbad)";
  }
  return "tie";
}

std::optional<Winner> WinnerFromWire(std::string_view text) {
  if (text == "model_a") return Winner::kA;
  if (text == "model_b") return Winner::kB;
  if (text == "tie") return Winner::kTie;
  if (text == "tie (bothbad)") return Winner::kTieBothBad;
  return std::nullopt;
}

FieldMap ArenaFieldMap() { return {{"record_id", "question_id"}}; }

LoadResult ParseCorpusLines(const std::vector<std::string>& lines,
                            const FieldMap& field_map) {
  LoadResult result;
  std::unordered_set<std::string> seen_ids;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_number = i + 1;
    try {
      Json object = Json::parse(lines[i]);
      ComparisonRecord record = ParseRecord(object, field_map);
      if (!seen_ids.insert(record.record_id).second) {
        throw ValidationError(fmt::format("duplicate record_id '{}'", record.record_id));
      }
      result.corpus.push_back(std::move(record));
    } catch (const Json::exception& e) {
      result.rejects.push_back({line_number, fmt::format("malformed JSON: {}", e.what())});
    } catch (const ValidationError& e) {
      result.rejects.push_back({line_number, e.what()});
    }
  }
  return result;
}

LoadResult LoadCorpus(const std::filesystem::path& path, const FieldMap& field_map) {
  return ParseCorpusLines(ReadLines(path), field_map);
}

Corpus FilterCorpus(const Corpus& corpus, const FilterCriteria& criteria) {
  if (criteria.max_turns < 1) throw PreconditionError("max_turns must be >= 1");
  Corpus retained;
  for (const ComparisonRecord& record : corpus) {
    if (record.language != criteria.require_language) continue;
    if (criteria.exclude_ties && IsTie(record.winner)) continue;
    if (record.turn_count > criteria.max_turns) continue;
    retained.push_back(record);
  }
  return retained;
}

Json RecordToJson(const ComparisonRecord& record) {
  Json out = {
      {"record_id", record.record_id},
      {"prompt", record.prompt},
      {"response_a", record.response_a},
      {"response_b", record.response_b},
      {"winner", WinnerToWire(record.winner)},
      {"model_a", record.model_a},
      {"model_b", record.model_b},
      {"language", record.language},
      {"turn", record.turn_count},
  };
  if (record.raw_conversations.is_object()) {
    for (const auto& [key, value] : record.raw_conversations.items()) out[key] = value;
  }
  return out;
}

void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::vector<Json> rows;
  rows.reserve(corpus.size());
  for (const ComparisonRecord& record : corpus) rows.push_back(RecordToJson(record));
  WriteJsonLines(path, rows);
}

void WriteRejects(const std::filesystem::path& path,
                  const std::vector<LoadReject>& rejects) {
  std::vector<Json> rows;
  rows.reserve(rejects.size());
  for (const LoadReject& reject : rejects) {
    rows.push_back({{"line_number", reject.line_number}, {"reason", reject.reason}});
  }
  WriteJsonLines(path, rows);
}

}  // namespace prefbasis
