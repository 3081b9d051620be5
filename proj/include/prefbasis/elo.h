#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "prefbasis/corpus.h"
#include "prefbasis/labeled_index.h"

namespace prefbasis {

struct Match {
  std::string model_a;
  std::string model_b;
  bool a_wins = true;
  std::string record_id;
  std::set<std::string> preferences;  // kept categories of the record
  std::string topic;
};

struct EloConfig {
  double initial = 1000.0;
  double k = 4.0;
  double scale = 400.0;
  int permutations = 100;
  uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

struct EloTable {
  std::string subset;  // "overall" or a preference category
  std::map<std::string, double> ratings;
  std::map<std::string, size_t> match_count;

  // Models by descending rating, ties by name.
  std::vector<std::string> Ranking() const;
};

// Expected score of a against b.
double ExpectedScore(double r_a, double r_b, double scale);

// One classic update in place. Throws ValidationError for a self-match.
void EloUpdate(std::map<std::string, double>& ratings, const Match& match, const EloConfig& config);

// Mean over `permutations` seeded orderings, each replayed from the initial
// rating. Empty input gives an empty table.
EloTable ComputeElo(const std::vector<Match>& matches, const EloConfig& config,
                    const std::string& subset = "overall");

// One table per kept preference (matches whose record carries it), plus
// "overall" over every match.
std::map<std::string, EloTable> ComputePelo(const std::vector<Match>& matches,
                                            const std::vector<std::string>& categories,
                                            const EloConfig& config);

// Non-tie records become matches; annotations are joined by record_id and
// records without one only carry an empty preference set.
std::vector<Match> BuildMatches(const Corpus& corpus, const LabeledIndex* index);

// elo_rankings.csv (one row per subset, rank columns) and elo_ratings.csv
// (subset, model, rating, n).
void WriteEloReports(const std::map<std::string, EloTable>& tables,
                     const std::vector<std::string>& subset_order,
                     const std::filesystem::path& dir);

}  // namespace prefbasis
