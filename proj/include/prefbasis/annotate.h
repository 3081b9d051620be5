#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "prefbasis/corpus.h"
#include "prefbasis/io.h"
#include "prefbasis/provider.h"

namespace prefbasis {

// A high-level preference ("more of X") and the granular phrases behind it.
struct PreferenceEntry {
  std::string label;
  std::vector<std::string> granular;

  bool operator==(const PreferenceEntry&) const = default;
};

struct Annotation {
  std::string record_id;
  std::vector<PreferenceEntry> preferences;
  std::vector<std::string> topics;
  std::string persona;  // stored for release, never analyzed

  bool operator==(const Annotation&) const = default;
};

struct AnnotationFailure {
  std::string record_id;
  std::string reason;
  std::string raw_text;
};

struct AnnotationSet {
  std::vector<Annotation> annotations;
  std::vector<AnnotationFailure> failures;
};

// Lowercases ASCII, trims, collapses whitespace runs and strips trailing
// . , ; : ! ? characters. Idempotent.
std::string NormalizeLabel(std::string_view raw);

// Precondition: record.winner is A or B.
std::string BuildExtractionPrompt(const ComparisonRecord& record);

// Accepts a single JSON object, optionally wrapped in a fenced code block.
// Throws ParseError for unusable structure and ValidationError when the
// content breaks Annotation invariants.
Annotation ParseExtractionResponse(std::string_view text, std::string record_id = {});

Json AnnotationToJson(const Annotation& annotation);
Annotation AnnotationFromJson(const Json& row);

std::vector<Annotation> ReadAnnotations(const std::filesystem::path& path);
void WriteAnnotations(const std::filesystem::path& path,
                      const std::vector<Annotation>& annotations);
void WriteAnnotationFailures(const std::filesystem::path& path,
                             const std::vector<AnnotationFailure>& failures);

struct AnnotateOptions {
  // Per-record append-only progress log. Records found here are not
  // re-requested. Empty disables checkpointing.
  std::filesystem::path checkpoint;
};

// One Annotation or one AnnotationFailure per input record, in corpus order.
// Throws PreconditionError for tie records and ConfigError for a bad config.
AnnotationSet AnnotateCorpus(const Corpus& corpus, Provider& provider,
                             const ProviderConfig& config,
                             const AnnotateOptions& options = {});

}  // namespace prefbasis
