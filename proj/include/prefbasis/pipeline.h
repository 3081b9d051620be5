#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "prefbasis/elo.h"
#include "prefbasis/provider.h"

namespace prefbasis {

// Every setting of a run. Keys accepted by Set() are the field names below
// with '_' spelled '-' (e.g. "batch-limit"), which are also the CLI flags.
struct RunConfig {
  std::filesystem::path workdir = "run";
  std::filesystem::path input;            // raw corpus for ingest
  std::string field_map = "auto";         // auto | arena | canonical
  std::string language = "English";
  int max_turns = 1;
  std::string provider = "mock";          // mock | live | replay
  std::filesystem::path transcripts;      // default <workdir>/transcripts
  uint64_t seed = 0;
  double threshold = 0.01;
  size_t batch_limit = 200;
  int cluster_extra_rounds = 3;
  size_t n_tasks = 1000;
  std::vector<std::string> judges;        // empty: provider-dependent default
  std::filesystem::path responses;        // metrics input; default judge output
  size_t tasks_per_rater = 20;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string operator_token;             // default $PREFBASIS_OPERATOR_TOKEN
  std::filesystem::path static_dir;
  EloConfig elo;
  ProviderConfig provider_config;

  // Throws ConfigError for an unknown key or an unparseable value.
  void Set(const std::string& key, const std::string& value);
  // Lines of key = value; '#' starts a comment.
  void LoadFile(const std::filesystem::path& path);
  void Validate() const;

  std::filesystem::path Path(const std::string& artifact) const { return workdir / artifact; }
};

// Names accepted by Set(), in documentation order.
const std::vector<std::string>& RunConfigKeys();

// Stage names in pipeline order, "serve" last.
const std::vector<std::string>& StageNames();

// Runs one stage, or every stage through elo for "pipeline". Prints one
// summary line per stage to `out`. Throws on failure; a missing input names
// the stage that produces it.
void RunStage(const std::string& stage, const RunConfig& config, std::ostream& out);

}  // namespace prefbasis
