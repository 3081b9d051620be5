#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefbasis/io.h"

namespace prefbasis {

enum class Winner { kA, kB, kTie, kTieBothBad };

// Wire spelling used by the Chatbot Arena release: "model_a", "model_b",
// "tie", "tie (bothbad)".
std::string_view WinnerToWire(Winner winner);
std::optional<Winner> WinnerFromWire(std::string_view text);

inline bool IsTie(Winner winner) {
  return winner == Winner::kTie || winner == Winner::kTieBothBad;
}

struct ComparisonRecord {
  std::string record_id;
  std::string prompt;  // first user turn
  std::string response_a;
  std::string response_b;
  Winner winner = Winner::kA;
  std::string model_a;
  std::string model_b;
  std::string language;
  int turn_count = 1;
  // Full conversation_a / conversation_b arrays when the source carried them.
  // Kept for provenance; nothing downstream reads past the first turn.
  Json raw_conversations;
};

using Corpus = std::vector<ComparisonRecord>;

struct FilterCriteria {
  std::string require_language = "English";
  bool exclude_ties = true;
  int max_turns = 1;
};

// Canonical field name -> field name in the source file. Fields not listed
// are read under their canonical name.
using FieldMap = std::map<std::string, std::string>;

// Field map for the public Chatbot Arena conversations release.
FieldMap ArenaFieldMap();

struct LoadReject {
  size_t line_number = 0;  // 1-based
  std::string reason;
};

struct LoadResult {
  Corpus corpus;
  std::vector<LoadReject> rejects;
};

// Parses line-delimited records. Every line lands either in `corpus` or in
// `rejects`. Throws IoError when the file cannot be read.
LoadResult LoadCorpus(const std::filesystem::path& path, const FieldMap& field_map = {});
LoadResult ParseCorpusLines(const std::vector<std::string>& lines,
                            const FieldMap& field_map = {});

// Keeps records matching the language, non-tie and turn-count predicates, in
// input order.
Corpus FilterCorpus(const Corpus& corpus, const FilterCriteria& criteria);

Json RecordToJson(const ComparisonRecord& record);
void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus);
void WriteRejects(const std::filesystem::path& path, const std::vector<LoadReject>& rejects);

}  // namespace prefbasis
