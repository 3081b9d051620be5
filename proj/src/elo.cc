#include "prefbasis/elo.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fmt/format.h"
#include "prefbasis/error.h"
#include "prefbasis/io.h"
#include "prefbasis/rng.h"

namespace prefbasis {

void EloConfig::Validate() const {
  if (!(k > 0.0)) throw ConfigError("elo k must be > 0");
  if (!(scale > 0.0)) throw ConfigError("elo scale must be > 0");
  if (permutations < 1) throw ConfigError("elo permutations must be >= 1");
  if (!std::isfinite(initial)) throw ConfigError("elo initial rating must be finite");
}

std::vector<std::string> EloTable::Ranking() const {
  std::vector<std::string> models;
  for (const auto& [model, rating] : ratings) models.push_back(model);
  std::stable_sort(models.begin(), models.end(), [this](const auto& a, const auto& b) {
    return ratings.at(a) > ratings.at(b);
  });
  return models;
}

double ExpectedScore(double r_a, double r_b, double scale) {
  return 1.0 / (1.0 + std::pow(10.0, (r_b - r_a) / scale));
}

void EloUpdate(std::map<std::string, double>& ratings, const Match& match,
               const EloConfig& config) {
  if (match.model_a == match.model_b) {
    throw ValidationError(fmt::format("self-match for {} (record {})", match.model_a,
                                      match.record_id));
  }
  double& r_a = ratings.try_emplace(match.model_a, config.initial).first->second;
  double& r_b = ratings.try_emplace(match.model_b, config.initial).first->second;
  const double e_a = ExpectedScore(r_a, r_b, config.scale);
  // S_b - E_b == -(S_a - E_a), so one delta keeps the transfer exact.
  const double delta = config.k * ((match.a_wins ? 1.0 : 0.0) - e_a);
  r_a += delta;
  r_b -= delta;
}

EloTable ComputeElo(const std::vector<Match>& matches, const EloConfig& config,
                    const std::string& subset) {
  config.Validate();
  EloTable table;
  table.subset = subset;
  if (matches.empty()) return table;

  std::map<std::string, double> initial;
  for (const Match& m : matches) {
    if (m.model_a == m.model_b) {
      throw ValidationError(fmt::format("self-match for {} (record {})", m.model_a, m.record_id));
    }
    initial.emplace(m.model_a, config.initial);
    initial.emplace(m.model_b, config.initial);
    ++table.match_count[m.model_a];
    ++table.match_count[m.model_b];
  }

  std::map<std::string, double> sum;
  for (const auto& [model, r] : initial) sum[model] = 0.0;
  std::vector<size_t> order(matches.size());
  for (int p = 0; p < config.permutations; ++p) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(DeriveSeed(config.seed, static_cast<uint64_t>(p)));
    rng.Shuffle(order);
    std::map<std::string, double> ratings = initial;
    for (size_t i : order) EloUpdate(ratings, matches[i], config);
    for (const auto& [model, r] : ratings) sum[model] += r;
  }
  for (const auto& [model, s] : sum) table.ratings[model] = s / config.permutations;
  return table;
}

std::map<std::string, EloTable> ComputePelo(const std::vector<Match>& matches,
                                            const std::vector<std::string>& categories,
                                            const EloConfig& config) {
  std::map<std::string, EloTable> out;
  out["overall"] = ComputeElo(matches, config, "overall");
  for (const std::string& category : categories) {
    std::vector<Match> subset;
    for (const Match& m : matches) {
      if (m.preferences.count(category) != 0) subset.push_back(m);
    }
    out[category] = ComputeElo(subset, config, category);
  }
  return out;
}

std::vector<Match> BuildMatches(const Corpus& corpus, const LabeledIndex* index) {
  std::vector<Match> matches;
  for (const ComparisonRecord& r : corpus) {
    if (IsTie(r.winner)) continue;
    Match m;
    m.model_a = r.model_a;
    m.model_b = r.model_b;
    m.a_wins = r.winner == Winner::kA;
    m.record_id = r.record_id;
    if (index != nullptr) {
      if (const LabeledRecord* lr = index->Find(r.record_id)) {
        m.preferences = lr->kept_preferences;
        m.topic = lr->topic;
      }
    }
    matches.push_back(std::move(m));
  }
  return matches;
}

void WriteEloReports(const std::map<std::string, EloTable>& tables,
                     const std::vector<std::string>& subset_order,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  size_t width = 0;
  for (const auto& [name, table] : tables) width = std::max(width, table.ratings.size());

  auto quote = [](const std::string& s) {
    return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
  };
  std::string rankings = "subset,matches";
  for (size_t i = 1; i <= width; ++i) rankings += fmt::format(",rank_{}", i);
  rankings += "\n";
  std::string ratings = "subset,model,rating,n\n";
  for (const std::string& subset : subset_order) {
    auto it = tables.find(subset);
    if (it == tables.end()) continue;
    const EloTable& table = it->second;
    size_t n = 0;
    for (const auto& [model, count] : table.match_count) n += count;
    const std::vector<std::string> ranking = table.Ranking();
    rankings += fmt::format("{},{}", quote(subset), n / 2);
    for (size_t i = 0; i < width; ++i) {
      rankings += "," + (i < ranking.size() ? quote(ranking[i]) : std::string());
    }
    rankings += "\n";
    for (const std::string& model : ranking) {
      ratings += fmt::format("{},{},{:.4f},{}\n", quote(subset), quote(model),
                             table.ratings.at(model), table.match_count.at(model));
    }
  }
  WriteFileAtomic(dir / "elo_rankings.csv", rankings);
  WriteFileAtomic(dir / "elo_ratings.csv", ratings);
}

}  // namespace prefbasis
